#include "ssvm/report.hpp"

#include "ssvm/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

namespace ssvm {

std::vector<StrategyReport> compare_caching_strategies(const Dataset& dataset,
                                                       const TrainConfig& config) {
  std::vector<StrategyReport> reports;
  for (CacheStrategy strategy :
       {CacheStrategy::NONE, CacheStrategy::CACHE_FIRST, CacheStrategy::DYNAMIC}) {
    TrainConfig cfg = config;
    cfg.cache_strategy = strategy;
    FitResult fr = fit(dataset, cfg);
    StrategyReport rep;
    rep.strategy = to_string(strategy);
    rep.iterations = fr.iterations;
    rep.full_oracle_calls = fr.full_oracle_calls;
    rep.cache_constraints = fr.cache_constraints;
    rep.final_o_W = fr.final_o_W;
    rep.gap = fr.certificate.gap;
    rep.trace = std::move(fr.trace);
    reports.push_back(std::move(rep));
  }
  return reports;
}

std::string comparison_to_csv(const std::vector<StrategyReport>& reports) {
  std::string out =
      "strategy,iterations,full_oracle_calls,cache_constraints,final_o_W,certificate_gap\n";
  char buf[200];
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof(buf), "%s,%d,%ld,%ld,%.17g,%.17g\n", r.strategy.c_str(),
                  r.iterations, r.full_oracle_calls, r.cache_constraints, r.final_o_W, r.gap);
    out += buf;
  }
  return out;
}

std::string trace_to_svg(const std::vector<TraceRow>& rows, const std::string& title) {
  const double W = 760, H = 420, ml = 70, mr = 20, mt = 40, mb = 45;
  double lo = 0.0, hi = 1.0;
  int tmax = 1;
  if (!rows.empty()) {
    lo = hi = rows.front().o_W;
    for (const auto& r : rows) {
      for (double v : {r.o_W, r.o_I}) {
        if (!std::isfinite(v)) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      tmax = std::max(tmax, r.iteration);
    }
    if (hi - lo < 1e-12) hi = lo + 1.0;
  }
  auto X = [&](double it) { return ml + (W - ml - mr) * (tmax > 0 ? it / tmax : 0.0); };
  auto Y = [&](double v) { return H - mb - (H - mt - mb) * (v - lo) / (hi - lo); };

  std::string svg;
  char buf[300];
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" "
                "viewBox=\"0 0 %g %g\">\n",
                W, H, W, H);
  svg += buf;
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%g\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">%s</text>\n",
                ml, title.c_str());
  svg += buf;
  // axes
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n"
                "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n",
                ml, H - mb, W - mr, H - mb, ml, mt, ml, H - mb);
  svg += buf;
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%g\" y=\"%g\" font-family=\"sans-serif\" font-size=\"12\">iteration"
                "</text>\n<text x=\"8\" y=\"%g\" font-family=\"sans-serif\" font-size=\"12\">"
                "objective</text>\n",
                (W - ml) / 2, H - 10.0, mt - 10.0);
  svg += buf;
  char num[64];
  std::snprintf(num, sizeof(num),
                "<text x=\"%g\" y=\"%g\" font-family=\"sans-serif\" font-size=\"11\">%.4g</text>\n",
                8.0, Y(lo), lo);
  svg += num;
  std::snprintf(num, sizeof(num),
                "<text x=\"%g\" y=\"%g\" font-family=\"sans-serif\" font-size=\"11\">%.4g</text>\n",
                8.0, Y(hi) + 10, hi);
  svg += num;

  // o_W line
  if (!rows.empty()) {
    svg += "<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.5\" points=\"";
    for (const auto& r : rows) {
      std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", X(r.iteration), Y(r.o_W));
      svg += buf;
    }
    svg += "\"/>\n";
  }
  // o_I marks: large for full-oracle events, small for cache events
  for (const auto& r : rows) {
    if (!std::isfinite(r.o_I)) continue;
    const bool full = r.tier != Tier::CACHE;
    std::snprintf(buf, sizeof(buf),
                  "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"%g\" fill=\"%s\" fill-opacity=\"0.8\"/>\n",
                  X(r.iteration), Y(r.o_I), full ? 4.0 : 1.6,
                  full ? (r.tier == Tier::EXACT ? "#b02518" : "#d98114") : "#4a9949");
    svg += buf;
  }
  svg += "</svg>\n";
  return svg;
}

void write_comparison_report(const std::vector<StrategyReport>& reports,
                             const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  atomic_write((std::filesystem::path(out_dir) / "caching_comparison.csv").string(),
               comparison_to_csv(reports));
  for (const auto& r : reports) {
    atomic_write((std::filesystem::path(out_dir) / ("trace_" + r.strategy + ".svg")).string(),
                 trace_to_svg(r.trace, "cutting-plane trace: " + r.strategy));
    atomic_write((std::filesystem::path(out_dir) / ("trace_" + r.strategy + ".csv")).string(),
                 trace_to_csv(r.trace));
  }
}

}  // namespace ssvm
