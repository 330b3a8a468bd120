#include "ssvm/trainer.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <thread>

namespace ssvm {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

int resolve_workers(int configured) {
  if (configured > 0) return configured;
  if (const char* env = std::getenv("SSVM_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace

const char* to_string(CacheStrategy s) {
  switch (s) {
    case CacheStrategy::NONE: return "none";
    case CacheStrategy::CACHE_FIRST: return "cache-first";
    case CacheStrategy::DYNAMIC: return "dynamic";
  }
  return "?";
}

void Dataset::validate() const {
  if (samples.empty()) throw ValidationError("dataset: no samples");
  for (const auto& s : samples) {
    s.instance.validate();
    validate_labeling(s.instance, s.truth);
    if (s.instance.num_labels != num_labels)
      throw ValidationError("dataset: instance num_labels differs from dataset header");
    if (s.instance.unary_dim() != d_u || s.instance.pairwise_dim() != d_p)
      throw ValidationError("dataset: instance feature dimensions differ from header");
    if (s.loss.node_weights.size() != 0 &&
        s.loss.node_weights.size() != s.instance.node_count)
      throw ValidationError("dataset: loss weight vector length mismatch");
    if (s.loss.node_weights.size() != 0 && s.loss.node_weights.minCoeff() < 0.0)
      throw ValidationError("dataset: negative loss weight");
  }
}

long Dataset::total_nodes() const {
  long t = 0;
  for (const auto& s : samples) t += s.instance.node_count;
  return t;
}

void TrainConfig::validate() const {
  if (C <= 0.0) throw ValidationError("config: C must be positive");
  if (epsilon <= 0.0) throw ValidationError("config: epsilon must be positive");
  if (cache_size < 1) throw ValidationError("config: cache size must be >= 1");
  bool has_full = false;
  for (Tier t : ladder)
    if (t != Tier::CACHE) has_full = true;
  if (ladder.empty() || !has_full)
    throw ValidationError("config: ladder must contain a non-cache tier");
  if (require_certificate && last_tier() != Tier::EXACT)
    throw ValidationError("config: certification requires the ladder to end with an exact tier");
}

bool TrainConfig::has_tier(Tier t) const {
  for (Tier x : ladder)
    if (x == t) return true;
  return false;
}

Tier TrainConfig::last_tier() const { return ladder.back(); }

Tier schedule_next_tier(double o_C, double o_Q, double o_W, Tier next_full) {
  if (!std::isfinite(o_C) || !std::isfinite(o_Q) || !std::isfinite(o_W))
    throw ValidationError("schedule_next_tier: non-finite objective value");
  return (o_C - o_Q < 0.5 * (o_Q - o_W)) ? Tier::CACHE : next_full;
}

Trainer::Trainer(const Dataset& dataset, const TrainConfig& config)
    : dataset_(dataset), config_(config), caches_(dataset.samples.size()) {
  dataset_.validate();
  config_.validate();
}

Labeling Trainer::cache_best(int sample, const Potentials& aug_pot) const {
  const auto& cache = caches_[sample];
  Labeling best;
  double best_value = -std::numeric_limits<double>::infinity();
  for (const auto& y : cache) {
    const double v = aug_pot.value(y);
    if (v > best_value) {
      best_value = v;
      best = y;
    }
  }
  return best;
}

void Trainer::push_cache(int sample, const Labeling& y) {
  auto& cache = caches_[sample];
  for (auto it = cache.begin(); it != cache.end(); ++it) {
    if (it->size() == y.size() && *it == y) {
      cache.erase(it);
      break;
    }
  }
  cache.push_back(y);
  while (static_cast<int>(cache.size()) > config_.cache_size) cache.pop_front();
}

Trainer::ConstraintResult Trainer::aggregate(const ParameterVector& params,
                                             const std::vector<Labeling>& labelings,
                                             OracleQuality origin) const {
  ConstraintResult out;
  const Eigen::VectorXd theta = params.flat();
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(theta.size());
  double loss_sum = 0.0;
  for (size_t i = 0; i < dataset_.samples.size(); ++i) {
    const Sample& s = dataset_.samples[i];
    delta += joint_feature(s.instance, s.truth, dataset_.symmetric) -
             joint_feature(s.instance, labelings[i], dataset_.symmetric);
    loss_sum += loss(s.truth, labelings[i], s.loss);
  }
  out.constraint.delta_psi = std::move(delta);
  out.constraint.loss_sum = loss_sum;
  out.constraint.origin = origin;
  out.xi_prime = loss_sum - theta.dot(out.constraint.delta_psi);
  return out;
}

Trainer::ConstraintResult Trainer::cache_lookup(const ParameterVector& params) {
  bool any = false;
  for (const auto& c : caches_)
    if (!c.empty()) any = true;
  if (!any) {
    ConstraintResult out;
    out.refused = true;
    return out;
  }
  std::vector<Labeling> picks(dataset_.samples.size());
  for (size_t i = 0; i < dataset_.samples.size(); ++i) {
    const Sample& s = dataset_.samples[i];
    if (caches_[i].empty()) {
      picks[i] = s.truth;  // zero contribution
      continue;
    }
    const Potentials aug_pot = make_potentials(loss_augment(s.instance, s.truth, s.loss), params);
    picks[i] = cache_best(static_cast<int>(i), aug_pot);
  }
  return aggregate(params, picks, OracleQuality::CACHED);
}

std::vector<Labeling> Trainer::run_full_oracles(const ParameterVector& params, Tier tier,
                                                ConstraintResult& out) {
  const size_t n = dataset_.samples.size();
  std::vector<Labeling> picks(n);
  std::vector<double> upper_slack(n, 0.0);
  std::vector<char> certified(n, 0);
  std::vector<char> exhausted(n, 0);
  const long epoch = oracle_epoch_++;

  auto run_one = [&](size_t i) {
    const Sample& s = dataset_.samples[i];
    const Potentials aug_pot =
        make_potentials(loss_augment(s.instance, s.truth, s.loss), params);
    OracleResult r;
    if (tier == Tier::MOVE_MAKING) {
      const std::uint64_t seed =
          splitmix64(config_.seed ^ splitmix64(static_cast<std::uint64_t>(epoch) * 7919u + i));
      r = move_making(aug_pot, s.truth, config_.move_restarts, seed);
    } else {
      try {
        r = branch_and_bound(aug_pot, config_.bnb_tol, config_.bnb_node_budget,
                             config_.lp_max_pivots);
      } catch (const BnbBudgetError& e) {
        r = e.best;
        exhausted[i] = 1;
      }
    }
    // a cached labeling may beat the heuristic (or a truncated search); both
    // are feasible, so the better one is kept
    const Labeling cb = cache_best(static_cast<int>(i), aug_pot);
    double value = r.value;
    Labeling pick = r.labeling.value_or(s.truth);
    if (cb.size() > 0) {
      const double cv = aug_pot.value(cb);
      if (cv > value) {
        value = cv;
        pick = cb;
      }
    }
    picks[i] = pick;
    certified[i] = (r.quality == OracleQuality::EXACT_CERTIFIED) ? 1 : 0;
    upper_slack[i] = std::isfinite(r.upper_bound)
                         ? r.upper_bound - aug_pot.value(s.truth)
                         : std::numeric_limits<double>::infinity();
  };

  const int workers = std::min<int>(resolve_workers(config_.workers), static_cast<int>(n));
  if (workers <= 1) {
    for (size_t i = 0; i < n; ++i) run_one(i);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) run_one(i);
      });
    for (auto& t : pool) t.join();
  }

  out.all_certified = true;
  out.xi_prime_upper = 0.0;
  for (size_t i = 0; i < n; ++i) {
    if (!certified[i]) out.all_certified = false;
    if (exhausted[i]) out.budget_exhausted = true;
    out.xi_prime_upper += upper_slack[i];
  }
  return picks;
}

Trainer::ConstraintResult Trainer::generate_constraint(const ParameterVector& params,
                                                       Tier tier) {
  if (tier == Tier::CACHE) return cache_lookup(params);
  ConstraintResult meta;
  const std::vector<Labeling> picks = run_full_oracles(params, tier, meta);
  ConstraintResult out = aggregate(
      params, picks,
      tier == Tier::EXACT && meta.all_certified ? OracleQuality::EXACT_CERTIFIED
                                                : OracleQuality::UNDER_GENERATING);
  out.all_certified = meta.all_certified;
  out.budget_exhausted = meta.budget_exhausted;
  out.xi_prime_upper = meta.xi_prime_upper;
  for (size_t i = 0; i < picks.size(); ++i) push_cache(static_cast<int>(i), picks[i]);
  return out;
}

FitResult Trainer::fit() {
  const auto start = std::chrono::steady_clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - start)
        .count();
  };

  const int L = dataset_.num_labels;
  const int dim = L * dataset_.d_u +
                  ParameterVector::pair_blocks(L, dataset_.symmetric) * dataset_.d_p;

  std::vector<Tier> full_tiers;
  for (Tier t : config_.ladder)
    if (t != Tier::CACHE) full_tiers.push_back(t);
  const bool cache_enabled =
      config_.has_tier(Tier::CACHE) && config_.cache_strategy != CacheStrategy::NONE;

  WorkingSet ws;
  FitResult res;
  res.certificate.epsilon = config_.epsilon;
  size_t ft = 0;
  bool have_o_Q = false;
  double o_Q = 0.0;
  bool terminated = false;

  auto emit = [&](const TraceRow& row) {
    res.trace.push_back(row);
    if (config_.sink) config_.sink(row);
  };

  for (int t = 0; t < config_.max_iterations; ++t) {
    QPSolution sol = ws.solve(config_.C, config_.qp_tol, t);
    ws.prune_inactive(t, config_.prune_patience);
    Eigen::VectorXd theta = sol.theta;
    if (theta.size() == 0) theta = Eigen::VectorXd::Zero(dim);
    const ParameterVector params =
        ParameterVector::from_flat(theta, L, dataset_.d_u, dataset_.d_p, dataset_.symmetric);
    const double o_W = sol.objective;
    const double half_norm = 0.5 * theta.squaredNorm();
    res.final_o_W = o_W;
    res.params = params;
    res.iterations = t + 1;

    // cache probe (section 4.2 test under the dynamic strategy)
    if (cache_enabled && (config_.cache_strategy == CacheStrategy::CACHE_FIRST || have_o_Q)) {
      ConstraintResult cr = cache_lookup(params);
      if (!cr.refused && cr.xi_prime - sol.xi >= config_.epsilon) {
        const double o_C = config_.C * cr.xi_prime + half_norm;
        const bool stay =
            config_.cache_strategy == CacheStrategy::CACHE_FIRST ||
            schedule_next_tier(o_C, o_Q, o_W, full_tiers[ft]) == Tier::CACHE;
        // the cache cut is valid and violated; it joins the working set
        // whether or not the schedule keeps trusting the cache
        ws.add(std::move(cr.constraint));
        if (stay) {
          ++res.cache_constraints;
          emit({t, Tier::CACHE, o_W, o_C, res.full_oracle_calls, elapsed_ms(), sol.xi,
                cr.xi_prime});
          continue;
        }
      }
    }

    const Tier tier = full_tiers[ft];
    ConstraintResult gr = generate_constraint(params, tier);
    ++res.full_oracle_calls;
    const double o_I = config_.C * gr.xi_prime + half_norm;
    o_Q = o_I;
    have_o_Q = true;
    if (gr.budget_exhausted) res.budget_exhausted = true;
    emit({t, tier, o_W, o_I, res.full_oracle_calls, elapsed_ms(), sol.xi, gr.xi_prime});

    const bool violated = gr.xi_prime - sol.xi >= config_.epsilon;
    ws.add(std::move(gr.constraint));
    if (!violated) {
      if (ft + 1 < full_tiers.size()) {
        ++ft;  // escalate: this tier is exhausted at the current theta
        continue;
      }
      // final tier found no violated constraint: done
      res.certificate.lower = o_W;
      if (tier == Tier::EXACT && std::isfinite(gr.xi_prime_upper)) {
        res.certificate.upper = config_.C * std::max(gr.xi_prime_upper, 0.0) + half_norm;
        res.certificate.gap = res.certificate.upper - res.certificate.lower;
        res.certificate.certified =
            gr.all_certified &&
            res.certificate.gap <= config_.C * config_.epsilon + 1e-9;
      }
      terminated = true;
      break;
    }
    if (tier == Tier::EXACT) ft = 0;  // ladder resets after a violated exact constraint
  }

  if (!terminated) {
    res.certificate.lower = res.final_o_W;
    res.certificate.certified = false;
  }
  return res;
}

FitResult fit(const Dataset& dataset, const TrainConfig& config) {
  Trainer trainer(dataset, config);
  return trainer.fit();
}

}  // namespace ssvm
