#include "ssvm/cli.hpp"

#include "ssvm/dataset.hpp"
#include "ssvm/metrics.hpp"
#include "ssvm/report.hpp"
#include "ssvm/synthetic.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace ssvm {

namespace {

std::vector<Tier> parse_ladder(const std::string& text) {
  std::vector<Tier> ladder;
  std::istringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "cache") ladder.push_back(Tier::CACHE);
    else if (item == "move") ladder.push_back(Tier::MOVE_MAKING);
    else if (item == "exact") ladder.push_back(Tier::EXACT);
    else throw ValidationError("unknown ladder tier: " + item);
  }
  if (ladder.empty()) throw ValidationError("empty ladder");
  return ladder;
}

CacheStrategy parse_strategy(const std::string& s) {
  if (s == "none") return CacheStrategy::NONE;
  if (s == "cache-first") return CacheStrategy::CACHE_FIRST;
  if (s == "dynamic") return CacheStrategy::DYNAMIC;
  throw ValidationError("unknown caching strategy: " + s);
}

Tier parse_eval_tier(const std::string& s) {
  if (s == "move") return Tier::MOVE_MAKING;
  if (s == "exact") return Tier::EXACT;
  throw ValidationError("unknown inference tier: " + s);
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"certified max-margin trainer for pairwise CRFs on loopy graphs"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic grid dataset");
  std::string gen_out = "dataset.json";
  int grid_w = 4, grid_h = 4, gen_labels = 3, gen_instances = 20;
  double gen_noise = 1.0;
  std::uint64_t gen_seed = 1;
  gen->add_option("--out", gen_out, "output dataset path");
  gen->add_option("--grid-w", grid_w);
  gen->add_option("--grid-h", grid_h);
  gen->add_option("--labels", gen_labels);
  gen->add_option("--noise", gen_noise);
  gen->add_option("--instances", gen_instances);
  gen->add_option("--seed", gen_seed);

  // shared training options
  std::string data_path, model_out = "model.json", trace_out, cert_out;
  std::string ladder_text = "cache,move,exact", strategy_text = "dynamic";
  TrainConfig cfg;
  bool require_certificate = false;

  auto add_train_options = [&](CLI::App* cmd) {
    cmd->add_option("--data", data_path, "dataset path")->required();
    cmd->add_option("--C", cfg.C, "regularization constant");
    cmd->add_option("--epsilon", cfg.epsilon, "stopping tolerance");
    cmd->add_option("--ladder", ladder_text, "comma list of tiers (cache,move,exact)");
    cmd->add_option("--strategy", strategy_text, "caching strategy: none|cache-first|dynamic");
    cmd->add_option("--cache-size", cfg.cache_size, "per-sample cache size r");
    cmd->add_option("--seed", cfg.seed);
    cmd->add_option("--restarts", cfg.move_restarts, "move-making random restarts");
    cmd->add_option("--max-iterations", cfg.max_iterations);
    cmd->add_option("--prune-patience", cfg.prune_patience);
    cmd->add_option("--bnb-budget", cfg.bnb_node_budget, "branch-and-bound node budget");
    cmd->add_option("--bnb-tol", cfg.bnb_tol, "branch-and-bound certificate tolerance");
    cmd->add_option("--workers", cfg.workers, "oracle worker threads (0 = all cores)");
  };

  auto* train = app.add_subcommand("train", "fit a model with the cutting-plane trainer");
  add_train_options(train);
  train->add_option("--model-out", model_out, "model output path");
  train->add_option("--trace-out", trace_out, "bound trace CSV output path");
  train->add_option("--cert-out", cert_out, "certificate output path");
  train->add_flag("--require-certificate", require_certificate,
                  "exit with status 3 unless training certifies optimality");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a model on a dataset");
  std::string eval_model, eval_data, eval_tier_text = "exact";
  eval_cmd->add_option("--model", eval_model)->required();
  eval_cmd->add_option("--data", eval_data)->required();
  eval_cmd->add_option("--tier", eval_tier_text, "inference tier: move|exact");

  // compare-caching
  auto* cmp = app.add_subcommand("compare-caching",
                                 "compare caching strategies on one dataset");
  std::string cmp_out_dir = "caching-report";
  add_train_options(cmp);
  cmp->add_option("--out-dir", cmp_out_dir, "report output directory");

  // trace-plot
  auto* plot = app.add_subcommand("trace-plot", "render a bound trace CSV as SVG");
  std::string plot_in, plot_out = "trace.svg";
  plot->add_option("--trace", plot_in)->required();
  plot->add_option("--out", plot_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed()) {
      save_dataset(generate_synthetic(grid_w, grid_h, gen_labels, gen_noise, gen_instances,
                                      gen_seed),
                   gen_out);
      std::cout << "wrote " << gen_out << "\n";
      return 0;
    }

    if (train->parsed() || cmp->parsed()) {
      cfg.ladder = parse_ladder(ladder_text);
      cfg.cache_strategy = parse_strategy(strategy_text);
      cfg.require_certificate = require_certificate;
      const Dataset dataset = load_dataset(data_path);

      if (cmp->parsed()) {
        auto reports = compare_caching_strategies(dataset, cfg);
        write_comparison_report(reports, cmp_out_dir);
        std::cout << comparison_to_csv(reports);
        return 0;
      }

      if (require_certificate && cfg.ladder.back() != Tier::EXACT) {
        std::cerr << "certificate requested but the ladder has no exact tier\n";
        return 3;
      }
      cfg.validate();
      const FitResult fr = fit(dataset, cfg);
      ModelFile model;
      model.params = fr.params;
      model.d_u = dataset.d_u;
      model.d_p = dataset.d_p;
      model.certificate = fr.certificate;
      model.config_hash = config_hash(cfg);
      save_model(model, model_out);
      if (!trace_out.empty()) save_trace(fr.trace, trace_out);
      if (!cert_out.empty()) save_certificate(fr.certificate, cert_out);
      std::printf("iterations=%d full_oracle_calls=%ld o_W=%.9g gap=%.9g certified=%s\n",
                  fr.iterations, fr.full_oracle_calls, fr.final_o_W, fr.certificate.gap,
                  fr.certificate.certified ? "yes" : "no");
      if (require_certificate && !fr.certificate.certified) {
        std::cerr << "certificate requested but training ended uncertified\n";
        return 3;
      }
      return 0;
    }

    if (eval_cmd->parsed()) {
      const ModelFile model = load_model(eval_model);
      const Dataset dataset = load_dataset(eval_data);
      const Metrics m = evaluate(model.params, dataset, parse_eval_tier(eval_tier_text));
      std::printf("global_accuracy=%.6f average_class_accuracy=%.6f\n", m.global_accuracy,
                  m.average_class_accuracy);
      for (Eigen::Index k = 0; k < m.per_class_jaccard.size(); ++k)
        std::printf("jaccard[%ld]=%.6f\n", static_cast<long>(k), m.per_class_jaccard[k]);
      return 0;
    }

    if (plot->parsed()) {
      std::ifstream in(plot_in, std::ios::binary);
      if (!in) throw ValidationError("cannot open: " + plot_in);
      std::ostringstream ss;
      ss << in.rdbuf();
      atomic_write(plot_out, trace_to_svg(trace_from_csv(ss.str()), plot_in));
      std::cout << "wrote " << plot_out << "\n";
      return 0;
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace ssvm
