#pragma once

#include "ssvm/trainer.hpp"

#include <string>

namespace ssvm {

inline constexpr int kDatasetFormatVersion = 1;
inline constexpr int kModelFormatVersion = 1;

/// Writes, then atomically renames into place.
void atomic_write(const std::string& path, const std::string& contents);

// Dataset container: self-describing JSON with explicit dimensions and a
// version field. Round-trips all fields exactly.
std::string dataset_to_json(const Dataset& dataset);
Dataset dataset_from_json(const std::string& text);
void save_dataset(const Dataset& dataset, const std::string& path);
Dataset load_dataset(const std::string& path);

/// Model file: theta blocks, dimensions, symmetry flag, training config hash,
/// and the certificate.
struct ModelFile {
  ParameterVector params;
  int d_u = 0;
  int d_p = 0;
  Certificate certificate;
  std::string config_hash;
};

std::string model_to_json(const ModelFile& model);
ModelFile model_from_json(const std::string& text);
void save_model(const ModelFile& model, const std::string& path);
ModelFile load_model(const std::string& path);

std::string certificate_to_json(const Certificate& cert);
void save_certificate(const Certificate& cert, const std::string& path);

/// Trace CSV with columns iteration,tier,o_W,o_I,oracle_calls_cumulative,wall_ms.
/// With include_wall false the wall_ms field is written as 0, which makes the
/// output reproducible for fixed config and seed.
std::string trace_to_csv(const std::vector<TraceRow>& rows, bool include_wall = true);
void save_trace(const std::vector<TraceRow>& rows, const std::string& path,
                bool include_wall = true);
std::vector<TraceRow> trace_from_csv(const std::string& text);

std::string config_hash(const TrainConfig& config);

}  // namespace ssvm
