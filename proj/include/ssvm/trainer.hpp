#pragma once

#include "ssvm/qp.hpp"

#include <deque>
#include <functional>
#include <optional>
#include <string>

namespace ssvm {

/// A training sample: instance, ground truth, and loss weights.
struct Sample {
  FactorGraphInstance instance;
  Labeling truth;
  LossSpec loss;
};

/// A training set with dataset-wide dimensions. All instances share L, d_u,
/// d_p and the pairwise symmetry mode, since the parameters are shared.
struct Dataset {
  int num_labels = 0;
  int d_u = 0;
  int d_p = 0;
  bool symmetric = true;
  std::vector<Sample> samples;

  void validate() const;
  long total_nodes() const;
};

enum class CacheStrategy { NONE, CACHE_FIRST, DYNAMIC };

const char* to_string(CacheStrategy s);

struct TraceRow {
  int iteration = 0;
  Tier tier = Tier::MOVE_MAKING;
  double o_W = 0.0;
  double o_I = 0.0;
  long oracle_calls = 0;  // cumulative full-oracle (non-cache) constraint generations
  long wall_ms = 0;
  // not part of the CSV schema, kept for bound audits
  double xi = 0.0;
  double xi_prime = 0.0;
};

using TraceSink = std::function<void(const TraceRow&)>;

/// Lower/upper bounds on the true training objective at termination.
struct Certificate {
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();
  double epsilon = 0.0;
  bool certified = false;
};

struct TrainConfig {
  double C = 1.0;
  double epsilon = 1e-4;
  std::vector<Tier> ladder = {Tier::CACHE, Tier::MOVE_MAKING, Tier::EXACT};
  CacheStrategy cache_strategy = CacheStrategy::DYNAMIC;
  int cache_size = 50;  // r
  double qp_tol = 1e-8;
  int prune_patience = 20;
  int max_iterations = 10000;
  std::uint64_t seed = 1;
  int move_restarts = 2;
  double bnb_tol = 1e-6;
  long bnb_node_budget = 100'000;
  long lp_max_pivots = 200'000;
  int workers = 0;  // 0: hardware concurrency (SSVM_WORKERS overrides)
  bool require_certificate = false;
  TraceSink sink;

  void validate() const;
  bool has_tier(Tier t) const;
  Tier last_tier() const;
};

struct FitResult {
  ParameterVector params;
  Certificate certificate;
  std::vector<TraceRow> trace;
  int iterations = 0;
  long full_oracle_calls = 0;
  long cache_constraints = 0;  // iterations served from the cache
  bool budget_exhausted = false;
  double final_o_W = 0.0;
};

/// The scheduling test: stay on the caching oracle iff
///   o_C - o_Q < (o_Q - o_W) / 2   (strict),
/// where o_Q is the last known full-oracle primal estimate.
Tier schedule_next_tier(double o_C, double o_Q, double o_W, Tier next_full);

/// One-slack cutting-plane trainer with per-sample constraint caches and a
/// cache / move-making / exact oracle ladder.
class Trainer {
 public:
  Trainer(const Dataset& dataset, const TrainConfig& config);

  FitResult fit();

  struct ConstraintResult {
    JointConstraint constraint;
    double xi_prime = 0.0;
    double xi_prime_upper = 0.0;  // from per-sample upper bounds (exact tier)
    bool refused = false;
    bool all_certified = false;
    bool budget_exhausted = false;
  };

  /// Runs the tier's oracle per sample, aggregates delta_psi and loss_sum,
  /// and appends the per-sample labelings to the caches.
  ConstraintResult generate_constraint(const ParameterVector& params, Tier tier);

  /// Best violated constraint available from the caches; refused iff all
  /// caches are empty.
  ConstraintResult cache_lookup(const ParameterVector& params);

  const std::vector<std::deque<Labeling>>& caches() const { return caches_; }

 private:
  ConstraintResult aggregate(const ParameterVector& params,
                             const std::vector<Labeling>& labelings,
                             OracleQuality origin) const;
  std::vector<Labeling> run_full_oracles(const ParameterVector& params, Tier tier,
                                         ConstraintResult& out);
  Labeling cache_best(int sample, const Potentials& aug_pot) const;
  void push_cache(int sample, const Labeling& y);

  const Dataset& dataset_;
  TrainConfig config_;
  std::vector<std::deque<Labeling>> caches_;
  long oracle_epoch_ = 0;  // distinguishes seeds across oracle invocations
};

FitResult fit(const Dataset& dataset, const TrainConfig& config);

}  // namespace ssvm
