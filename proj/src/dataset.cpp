#include "ssvm/dataset.hpp"

#include <json.hpp>

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ssvm {

using nlohmann::json;

void atomic_write(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open for writing: " + tmp);
    out << contents;
    if (!out) throw ValidationError("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols,
                                 const char* what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
    throw ValidationError(std::string("bad matrix rows: ") + what);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[r];
    if (static_cast<Eigen::Index>(row.size()) != cols)
      throw ValidationError(std::string("bad matrix cols: ") + what);
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[c].get<double>();
  }
  return m;
}

}  // namespace

std::string dataset_to_json(const Dataset& dataset) {
  json j;
  j["format"] = "ssvm-dataset";
  j["version"] = kDatasetFormatVersion;
  j["d_u"] = dataset.d_u;
  j["d_p"] = dataset.d_p;
  j["num_labels"] = dataset.num_labels;
  j["symmetric"] = dataset.symmetric;
  json instances = json::array();
  for (const auto& s : dataset.samples) {
    json inst;
    inst["nodes"] = s.instance.node_count;
    json edges = json::array();
    for (const auto& [a, b] : s.instance.edges) edges.push_back(json::array({a, b}));
    inst["edges"] = std::move(edges);
    inst["unary_features"] = matrix_to_json(s.instance.unary_features);
    inst["edge_features"] = matrix_to_json(s.instance.edge_features);
    inst["truth"] = std::vector<int>(s.truth.data(), s.truth.data() + s.truth.size());
    if (s.loss.node_weights.size() != 0)
      inst["loss_weights"] = std::vector<double>(
          s.loss.node_weights.data(), s.loss.node_weights.data() + s.loss.node_weights.size());
    instances.push_back(std::move(inst));
  }
  j["instances"] = std::move(instances);
  return j.dump(1);
}

Dataset dataset_from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ValidationError("dataset: malformed JSON");
  if (j.value("format", "") != "ssvm-dataset")
    throw ValidationError("dataset: wrong format tag");
  if (j.value("version", -1) != kDatasetFormatVersion)
    throw ValidationError("dataset: unsupported format version");
  Dataset d;
  d.d_u = j.at("d_u").get<int>();
  d.d_p = j.at("d_p").get<int>();
  d.num_labels = j.at("num_labels").get<int>();
  d.symmetric = j.at("symmetric").get<bool>();
  for (const auto& inst : j.at("instances")) {
    Sample s;
    s.instance.node_count = inst.at("nodes").get<int>();
    s.instance.num_labels = d.num_labels;
    for (const auto& e : inst.at("edges")) {
      int a = e[0].get<int>();
      int b = e[1].get<int>();
      if (a > b) std::swap(a, b);
      s.instance.edges.emplace_back(a, b);
    }
    s.instance.unary_features =
        matrix_from_json(inst.at("unary_features"), d.d_u, s.instance.node_count, "unary");
    s.instance.edge_features =
        matrix_from_json(inst.at("edge_features"), d.d_p,
                         static_cast<Eigen::Index>(s.instance.edges.size()), "edge");
    const auto& truth = inst.at("truth");
    s.truth.resize(truth.size());
    for (size_t i = 0; i < truth.size(); ++i) s.truth[i] = truth[i].get<int>();
    if (inst.contains("loss_weights")) {
      const auto& w = inst.at("loss_weights");
      s.loss.node_weights.resize(w.size());
      for (size_t i = 0; i < w.size(); ++i) s.loss.node_weights[i] = w[i].get<double>();
    }
    d.samples.push_back(std::move(s));
  }
  d.validate();
  return d;
}

void save_dataset(const Dataset& dataset, const std::string& path) {
  atomic_write(path, dataset_to_json(dataset));
}

Dataset load_dataset(const std::string& path) { return dataset_from_json(read_file(path)); }

std::string model_to_json(const ModelFile& model) {
  json j;
  j["format"] = "ssvm-model";
  j["version"] = kModelFormatVersion;
  j["num_labels"] = model.params.num_labels();
  j["d_u"] = model.d_u;
  j["d_p"] = model.d_p;
  j["symmetric"] = model.params.symmetric;
  j["theta_unary"] = matrix_to_json(model.params.unary);
  j["theta_pairwise"] = matrix_to_json(model.params.pairwise);
  j["config_hash"] = model.config_hash;
  j["certificate"] = json::parse(certificate_to_json(model.certificate));
  return j.dump(1);
}

ModelFile model_from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ValidationError("model: malformed JSON");
  if (j.value("format", "") != "ssvm-model") throw ValidationError("model: wrong format tag");
  if (j.value("version", -1) != kModelFormatVersion)
    throw ValidationError("model: unsupported format version");
  ModelFile m;
  const int L = j.at("num_labels").get<int>();
  m.d_u = j.at("d_u").get<int>();
  m.d_p = j.at("d_p").get<int>();
  m.params.symmetric = j.at("symmetric").get<bool>();
  m.params.unary = matrix_from_json(j.at("theta_unary"), L, m.d_u, "theta_unary");
  m.params.pairwise = matrix_from_json(
      j.at("theta_pairwise"), ParameterVector::pair_blocks(L, m.params.symmetric), m.d_p,
      "theta_pairwise");
  const auto& c = j.at("certificate");
  m.certificate.lower = c.at("lower").get<double>();
  m.certificate.upper = c.at("upper").is_null() ? std::numeric_limits<double>::infinity()
                                                : c.at("upper").get<double>();
  m.certificate.gap = c.at("gap").is_null() ? std::numeric_limits<double>::infinity()
                                            : c.at("gap").get<double>();
  m.certificate.epsilon = c.at("epsilon").get<double>();
  m.certificate.certified = c.at("certified").get<bool>();
  m.config_hash = j.value("config_hash", "");
  return m;
}

void save_model(const ModelFile& model, const std::string& path) {
  atomic_write(path, model_to_json(model));
}

ModelFile load_model(const std::string& path) { return model_from_json(read_file(path)); }

std::string certificate_to_json(const Certificate& cert) {
  json j;
  j["lower"] = cert.lower;
  if (std::isfinite(cert.upper)) j["upper"] = cert.upper; else j["upper"] = nullptr;
  if (std::isfinite(cert.gap)) j["gap"] = cert.gap; else j["gap"] = nullptr;
  j["epsilon"] = cert.epsilon;
  j["certified"] = cert.certified;
  return j.dump(1);
}

void save_certificate(const Certificate& cert, const std::string& path) {
  atomic_write(path, certificate_to_json(cert));
}

std::string trace_to_csv(const std::vector<TraceRow>& rows, bool include_wall) {
  std::string out = "iteration,tier,o_W,o_I,oracle_calls_cumulative,wall_ms\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%s,%.17g,%.17g,%ld,%ld\n", r.iteration,
                  to_string(r.tier), r.o_W, r.o_I, r.oracle_calls,
                  include_wall ? r.wall_ms : 0L);
    out += buf;
  }
  return out;
}

void save_trace(const std::vector<TraceRow>& rows, const std::string& path,
                bool include_wall) {
  atomic_write(path, trace_to_csv(rows, include_wall));
}

std::vector<TraceRow> trace_from_csv(const std::string& text) {
  std::vector<TraceRow> rows;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    TraceRow r;
    char tier[32] = {0};
    if (std::sscanf(line.c_str(), "%d,%31[^,],%lg,%lg,%ld,%ld", &r.iteration, tier, &r.o_W,
                    &r.o_I, &r.oracle_calls, &r.wall_ms) != 6)
      throw ValidationError("trace: malformed CSV row: " + line);
    const std::string t = tier;
    r.tier = t == "cache" ? Tier::CACHE : (t == "move" ? Tier::MOVE_MAKING : Tier::EXACT);
    rows.push_back(r);
  }
  return rows;
}

std::string config_hash(const TrainConfig& config) {
  std::ostringstream ss;
  ss << config.C << '|' << config.epsilon << '|' << to_string(config.cache_strategy) << '|'
     << config.cache_size << '|' << config.qp_tol << '|' << config.prune_patience << '|'
     << config.max_iterations << '|' << config.seed << '|' << config.move_restarts << '|'
     << config.bnb_tol << '|' << config.bnb_node_budget << '|' << config.lp_max_pivots;
  for (Tier t : config.ladder) ss << '|' << to_string(t);
  // FNV-1a
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : ss.str()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

}  // namespace ssvm
