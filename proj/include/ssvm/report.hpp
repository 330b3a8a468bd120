#pragma once

#include "ssvm/trainer.hpp"

#include <string>
#include <vector>

namespace ssvm {

/// Per-strategy summary of one training run.
struct StrategyReport {
  std::string strategy;
  int iterations = 0;
  long full_oracle_calls = 0;
  long cache_constraints = 0;
  double final_o_W = 0.0;
  double gap = std::numeric_limits<double>::infinity();
  std::vector<TraceRow> trace;
};

/// Trains with the three caching strategies (none, cache-until-exhausted,
/// dynamic) under otherwise identical configuration.
std::vector<StrategyReport> compare_caching_strategies(const Dataset& dataset,
                                                       const TrainConfig& config);

std::string comparison_to_csv(const std::vector<StrategyReport>& reports);

/// SVG of one training trace: a line for o_W, large marks at full-oracle
/// events (o_I), small marks at cache events.
std::string trace_to_svg(const std::vector<TraceRow>& rows, const std::string& title);

/// Writes the comparison CSV plus one trace SVG per strategy into out_dir.
void write_comparison_report(const std::vector<StrategyReport>& reports,
                             const std::string& out_dir);

}  // namespace ssvm
