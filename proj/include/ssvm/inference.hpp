#pragma once

#include "ssvm/graph.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace ssvm {

enum class OracleQuality { CACHED, UNDER_GENERATING, RELAXED_UPPER_BOUND, EXACT_CERTIFIED };

const char* to_string(OracleQuality q);

/// A labeling (or relaxed bound) tagged with its quality class.
/// value <= upper_bound always; EXACT_CERTIFIED results have
/// upper_bound - value within the certification tolerance.
struct OracleResult {
  std::optional<Labeling> labeling;
  double value = 0.0;
  OracleQuality quality = OracleQuality::UNDER_GENERATING;
  double upper_bound = std::numeric_limits<double>::infinity();
  bool fractional = false;
};

struct EnumerationBudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown when branch-and-bound exhausts its node budget. Carries the best
/// incumbent found and the best global bound, both still valid.
struct BnbBudgetError : std::runtime_error {
  OracleResult best;
  explicit BnbBudgetError(OracleResult r)
      : std::runtime_error("branch_and_bound: node budget exceeded"), best(std::move(r)) {}
};

struct OracleConfig {
  long enumeration_budget = 2'000'000;
  int move_restarts = 2;
  std::uint64_t seed = 1;
  double bnb_tol = 1e-6;
  long bnb_node_budget = 100'000;
  long lp_max_pivots = 200'000;
};

// --- exhaustive enumeration (reference oracle) ---

OracleResult exhaustive_map(const Potentials& pot, long budget = 2'000'000);
OracleResult exhaustive_map(const FactorGraphInstance& instance,
                            const ParameterVector& params, long budget = 2'000'000);

// --- move making ---

/// Accepted-move score trajectories, one per local-search run (the run from
/// the caller's init first, then one per random restart).
struct MoveTrace {
  std::vector<std::vector<double>> run_values;
};

OracleResult move_making(const Potentials& pot, const Labeling& init, int restarts,
                         std::uint64_t seed, MoveTrace* trace = nullptr);
OracleResult move_making(const FactorGraphInstance& instance, const ParameterVector& params,
                         const Labeling& init, int restarts, std::uint64_t seed,
                         MoveTrace* trace = nullptr);

// --- LP relaxation over the pairwise local polytope ---

struct RelaxedSolution {
  Eigen::MatrixXd node_marginals;  // L x n
  std::vector<Eigen::MatrixXd> edge_marginals;
  double objective = 0.0;
  bool fractional = false;
  bool converged = true;
};

/// Per-node allowed-label masks used by branch-and-bound subproblems.
using LabelMask = std::vector<std::vector<std::uint8_t>>;

LabelMask full_mask(int node_count, int num_labels);

RelaxedSolution lp_relaxation(const Potentials& pot, const LabelMask* mask,
                              long max_pivots, double tol);
RelaxedSolution lp_relaxation(const FactorGraphInstance& instance,
                              const ParameterVector& params,
                              long max_iters = 200'000, double tol = 1e-6);

// --- branch and bound ---

struct BnbStats {
  long nodes_expanded = 0;
  long lp_solves = 0;
};

OracleResult branch_and_bound(const Potentials& pot, double tol,
                              long node_budget = 100'000, long lp_max_pivots = 200'000,
                              BnbStats* stats = nullptr);
OracleResult branch_and_bound(const FactorGraphInstance& instance,
                              const ParameterVector& params, double tol,
                              long node_budget = 100'000, BnbStats* stats = nullptr);

// --- loss-augmented dispatch ---

enum class Tier { CACHE, MOVE_MAKING, EXACT };

const char* to_string(Tier t);

/// Loss-augmented separation oracle: augments the objective by the Hamming
/// loss against `truth` and dispatches to the oracle named by `tier`
/// (MOVE_MAKING or EXACT). Move making starts from the ground-truth labeling.
OracleResult loss_augmented_oracle(const FactorGraphInstance& instance,
                                   const Labeling& truth, const LossSpec& spec,
                                   const ParameterVector& params, Tier tier,
                                   const OracleConfig& cfg = {});

}  // namespace ssvm
