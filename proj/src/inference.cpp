#include "ssvm/inference.hpp"

#include "ssvm/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>

namespace ssvm {

const char* to_string(OracleQuality q) {
  switch (q) {
    case OracleQuality::CACHED: return "cached";
    case OracleQuality::UNDER_GENERATING: return "under_generating";
    case OracleQuality::RELAXED_UPPER_BOUND: return "relaxed_upper_bound";
    case OracleQuality::EXACT_CERTIFIED: return "exact_certified";
  }
  return "?";
}

const char* to_string(Tier t) {
  switch (t) {
    case Tier::CACHE: return "cache";
    case Tier::MOVE_MAKING: return "move";
    case Tier::EXACT: return "exact";
  }
  return "?";
}

// ---------------------------------------------------------------- exhaustive

OracleResult exhaustive_map(const Potentials& pot, long budget) {
  const int n = pot.node_count();
  const int L = pot.num_labels();
  double states = 1.0;
  for (int i = 0; i < n; ++i) {
    states *= L;
    if (states > static_cast<double>(budget))
      throw EnumerationBudgetError("exhaustive_map: state count exceeds enumeration budget");
  }
  Labeling y = Labeling::Zero(n);
  Labeling best = y;
  double best_value = pot.value(y);
  // lexicographic ascending with node 0 most significant; strict improvement
  // keeps the lexicographically smallest maximizer
  for (;;) {
    int k = n - 1;
    while (k >= 0 && y[k] == L - 1) y[k--] = 0;
    if (k < 0) break;
    ++y[k];
    const double v = pot.value(y);
    if (v > best_value) {
      best_value = v;
      best = y;
    }
  }
  OracleResult r;
  r.labeling = best;
  r.value = best_value;
  r.quality = OracleQuality::EXACT_CERTIFIED;
  r.upper_bound = best_value;
  return r;
}

OracleResult exhaustive_map(const FactorGraphInstance& instance,
                            const ParameterVector& params, long budget) {
  return exhaustive_map(make_potentials(instance, params), budget);
}

// --------------------------------------------------------------- move making

namespace {

struct Incidence {
  std::vector<std::vector<std::pair<int, bool>>> at;  // node -> (edge, node-is-first)
  explicit Incidence(const Potentials& pot) : at(pot.node_count()) {
    for (int e = 0; e < pot.edge_count(); ++e) {
      at[pot.edges[e].first].push_back({e, true});
      at[pot.edges[e].second].push_back({e, false});
    }
  }
};

double relabel_gain(const Potentials& pot, const Incidence& inc, const Labeling& y,
                    int node, int label) {
  double g = pot.node(label, node) - pot.node(y[node], node);
  for (const auto& [e, first] : inc.at[node]) {
    const auto& t = pot.edge[e];
    if (first)
      g += t(label, y[pot.edges[e].second]) - t(y[node], y[pot.edges[e].second]);
    else
      g += t(y[pot.edges[e].first], label) - t(y[pot.edges[e].first], y[node]);
  }
  return g;
}

// Greedy strictly-improving alpha-expansion sweeps interleaved with ICM
// passes; accepted-move values are appended to `values` when given.
double local_search(const Potentials& pot, const Incidence& inc, Labeling& y,
                    std::vector<double>* values) {
  const int n = pot.node_count();
  const int L = pot.num_labels();
  double value = pot.value(y);
  if (values) values->push_back(value);
  bool improved = true;
  while (improved) {
    improved = false;
    for (int alpha = 0; alpha < L; ++alpha) {
      for (int i = 0; i < n; ++i) {
        if (y[i] == alpha) continue;
        const double g = relabel_gain(pot, inc, y, i, alpha);
        if (g > 0.0) {
          y[i] = alpha;
          value += g;
          improved = true;
          if (values) values->push_back(value);
        }
      }
    }
    for (int i = 0; i < n; ++i) {
      int best_label = y[i];
      double best_gain = 0.0;
      for (int l = 0; l < L; ++l) {
        if (l == y[i]) continue;
        const double g = relabel_gain(pot, inc, y, i, l);
        if (g > best_gain) {
          best_gain = g;
          best_label = l;
        }
      }
      if (best_label != y[i]) {
        y[i] = best_label;
        value += best_gain;
        improved = true;
        if (values) values->push_back(value);
      }
    }
  }
  return pot.value(y);
}

}  // namespace

OracleResult move_making(const Potentials& pot, const Labeling& init, int restarts,
                         std::uint64_t seed, MoveTrace* trace) {
  if (init.size() != pot.node_count())
    throw ValidationError("move_making: init labeling has wrong length");
  const int n = pot.node_count();
  const int L = pot.num_labels();
  Incidence inc(pot);

  Labeling best = init;
  std::vector<double>* values = nullptr;
  if (trace) {
    trace->run_values.emplace_back();
    values = &trace->run_values.back();
  }
  double best_value = local_search(pot, inc, best, values);

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, L - 1);
  for (int r = 0; r < restarts; ++r) {
    Labeling y(n);
    for (int i = 0; i < n; ++i) y[i] = pick(rng);
    if (trace) {
      trace->run_values.emplace_back();
      values = &trace->run_values.back();
    }
    const double v = local_search(pot, inc, y, values);
    if (v > best_value) {
      best_value = v;
      best = y;
    }
  }

  OracleResult res;
  res.labeling = best;
  res.value = best_value;
  res.quality = OracleQuality::UNDER_GENERATING;
  res.upper_bound = std::numeric_limits<double>::infinity();
  return res;
}

OracleResult move_making(const FactorGraphInstance& instance, const ParameterVector& params,
                         const Labeling& init, int restarts, std::uint64_t seed,
                         MoveTrace* trace) {
  validate_labeling(instance, init);
  return move_making(make_potentials(instance, params), init, restarts, seed, trace);
}

// ------------------------------------------------------------- LP relaxation

LabelMask full_mask(int node_count, int num_labels) {
  return LabelMask(node_count, std::vector<std::uint8_t>(num_labels, 1));
}

RelaxedSolution lp_relaxation(const Potentials& pot, const LabelMask* mask,
                              long max_pivots, double tol) {
  const int n = pot.node_count();
  const int L = pot.num_labels();
  const int m = pot.edge_count();

  std::vector<std::vector<int>> allowed(n);
  for (int i = 0; i < n; ++i) {
    for (int l = 0; l < L; ++l)
      if (!mask || (*mask)[i][l]) allowed[i].push_back(l);
    if (allowed[i].empty()) throw ValidationError("lp_relaxation: empty label mask");
  }

  // variable layout: node marginals first, then edge marginals
  std::vector<int> node_base(n);
  int nv = 0;
  for (int i = 0; i < n; ++i) {
    node_base[i] = nv;
    nv += static_cast<int>(allowed[i].size());
  }
  std::vector<int> edge_base(m);
  for (int e = 0; e < m; ++e) {
    edge_base[e] = nv;
    nv += static_cast<int>(allowed[pot.edges[e].first].size() *
                           allowed[pot.edges[e].second].size());
  }

  int nrows = n;
  for (int e = 0; e < m; ++e)
    nrows += static_cast<int>(allowed[pot.edges[e].first].size() +
                              allowed[pot.edges[e].second].size());

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nrows, nv);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(nrows);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(nv);

  for (int i = 0; i < n; ++i) {
    for (size_t k = 0; k < allowed[i].size(); ++k) {
      A(i, node_base[i] + static_cast<int>(k)) = 1.0;
      c[node_base[i] + static_cast<int>(k)] = pot.node(allowed[i][k], i);
    }
    b[i] = 1.0;
  }
  int row = n;
  for (int e = 0; e < m; ++e) {
    const auto& [ni, nj] = pot.edges[e];
    const auto& Ai = allowed[ni];
    const auto& Aj = allowed[nj];
    const int cols_j = static_cast<int>(Aj.size());
    for (size_t a = 0; a < Ai.size(); ++a)
      for (size_t bb = 0; bb < Aj.size(); ++bb)
        c[edge_base[e] + static_cast<int>(a) * cols_j + static_cast<int>(bb)] =
            pot.edge[e](Ai[a], Aj[bb]);
    // row-sum consistency with node ni
    for (size_t a = 0; a < Ai.size(); ++a, ++row) {
      for (size_t bb = 0; bb < Aj.size(); ++bb)
        A(row, edge_base[e] + static_cast<int>(a) * cols_j + static_cast<int>(bb)) = 1.0;
      A(row, node_base[ni] + static_cast<int>(a)) = -1.0;
    }
    // column-sum consistency with node nj
    for (size_t bb = 0; bb < Aj.size(); ++bb, ++row) {
      for (size_t a = 0; a < Ai.size(); ++a)
        A(row, edge_base[e] + static_cast<int>(a) * cols_j + static_cast<int>(bb)) = 1.0;
      A(row, node_base[nj] + static_cast<int>(bb)) = -1.0;
    }
  }

  SimplexResult lp = simplex_max(A, b, c, max_pivots);
  RelaxedSolution sol;
  sol.node_marginals = Eigen::MatrixXd::Zero(L, n);
  sol.edge_marginals.assign(m, Eigen::MatrixXd::Zero(L, L));
  if (lp.status == SimplexResult::Status::IterationLimit) {
    // no optimal basis; the trivial bound remains valid
    sol.converged = false;
    sol.objective = std::numeric_limits<double>::infinity();
    return sol;
  }
  if (lp.status != SimplexResult::Status::Optimal)
    throw std::logic_error("lp_relaxation: local polytope LP infeasible or unbounded");

  sol.objective = lp.value;
  for (int i = 0; i < n; ++i)
    for (size_t k = 0; k < allowed[i].size(); ++k)
      sol.node_marginals(allowed[i][k], i) = lp.x[node_base[i] + static_cast<int>(k)];
  for (int e = 0; e < m; ++e) {
    const auto& Ai = allowed[pot.edges[e].first];
    const auto& Aj = allowed[pot.edges[e].second];
    for (size_t a = 0; a < Ai.size(); ++a)
      for (size_t bb = 0; bb < Aj.size(); ++bb)
        sol.edge_marginals[e](Ai[a], Aj[bb]) =
            lp.x[edge_base[e] + static_cast<int>(a) * static_cast<int>(Aj.size()) +
                 static_cast<int>(bb)];
  }
  sol.fractional = false;
  for (int i = 0; i < n && !sol.fractional; ++i)
    for (int l = 0; l < L; ++l) {
      const double v = sol.node_marginals(l, i);
      if (v > tol && v < 1.0 - tol) {
        sol.fractional = true;
        break;
      }
    }
  return sol;
}

RelaxedSolution lp_relaxation(const FactorGraphInstance& instance,
                              const ParameterVector& params, long max_iters, double tol) {
  if (max_iters < 1) throw ValidationError("lp_relaxation: max_iters must be >= 1");
  if (tol <= 0.0) throw ValidationError("lp_relaxation: tol must be positive");
  return lp_relaxation(make_potentials(instance, params), nullptr, max_iters, tol);
}

// ----------------------------------------------------------- branch and bound

namespace {

Labeling round_marginals(const RelaxedSolution& rel) {
  const int n = static_cast<int>(rel.node_marginals.cols());
  Labeling y(n);
  for (int i = 0; i < n; ++i) {
    Eigen::Index am = 0;
    rel.node_marginals.col(i).maxCoeff(&am);  // first maximizer on ties
    y[i] = static_cast<int>(am);
  }
  return y;
}

bool lex_less(const Labeling& a, const Labeling& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

struct BnbNode {
  LabelMask mask;
  RelaxedSolution rel;
  long order = 0;
};

struct BnbCompare {
  bool operator()(const BnbNode& a, const BnbNode& b) const {
    if (a.rel.objective != b.rel.objective) return a.rel.objective < b.rel.objective;
    return a.order > b.order;  // FIFO among equal bounds
  }
};

}  // namespace

OracleResult branch_and_bound(const Potentials& pot, double tol, long node_budget,
                              long lp_max_pivots, BnbStats* stats) {
  if (tol <= 0.0) throw ValidationError("branch_and_bound: tol must be positive");
  const int n = pot.node_count();
  const int L = pot.num_labels();

  OracleResult res;
  res.quality = OracleQuality::EXACT_CERTIFIED;

  if (pot.edge_count() == 0) {
    Labeling y(n);
    double v = 0.0;
    for (int i = 0; i < n; ++i) {
      Eigen::Index am = 0;
      v += pot.node.col(i).maxCoeff(&am);
      y[i] = static_cast<int>(am);
    }
    res.labeling = y;
    res.value = v;
    res.upper_bound = v;
    return res;
  }

  BnbStats local_stats;
  BnbStats& st = stats ? *stats : local_stats;

  Labeling incumbent;
  double inc_value = -std::numeric_limits<double>::infinity();
  auto offer = [&](const Labeling& y) {
    const double v = pot.value(y);
    if (v > inc_value + 1e-12 ||
        (std::abs(v - inc_value) <= 1e-12 && incumbent.size() > 0 && lex_less(y, incumbent))) {
      inc_value = v;
      incumbent = y;
    } else if (incumbent.size() == 0) {
      inc_value = v;
      incumbent = y;
    }
  };

  std::priority_queue<BnbNode, std::vector<BnbNode>, BnbCompare> queue;
  long order = 0;

  auto solve_and_push = [&](LabelMask mask) {
    ++st.lp_solves;
    RelaxedSolution rel = lp_relaxation(pot, &mask, lp_max_pivots, 1e-7);
    if (rel.converged) offer(round_marginals(rel));
    if (rel.converged && !rel.fractional) return;  // vertex is integral and exact here
    if (rel.objective > inc_value + tol)
      queue.push(BnbNode{std::move(mask), std::move(rel), order++});
  };

  solve_and_push(full_mask(n, L));
  bool root_fractional = inc_value == -std::numeric_limits<double>::infinity()
                             ? true
                             : !queue.empty();

  double final_bound = inc_value;
  while (!queue.empty()) {
    BnbNode top = queue.top();
    if (top.rel.objective <= inc_value + tol) {
      final_bound = std::max(inc_value, top.rel.objective);
      break;
    }
    queue.pop();
    if (++st.nodes_expanded > node_budget) {
      OracleResult best;
      best.labeling = incumbent;
      best.value = inc_value;
      best.quality = OracleQuality::RELAXED_UPPER_BOUND;
      best.upper_bound = top.rel.objective;
      best.fractional = true;
      throw BnbBudgetError(std::move(best));
    }

    // branch on the node whose marginal is most fractional (max entropy)
    int branch_node = -1;
    double best_entropy = -1.0;
    for (int i = 0; i < n; ++i) {
      double h = 0.0;
      for (int l = 0; l < L; ++l) {
        const double p = top.rel.node_marginals(l, i);
        if (p > 1e-12) h -= p * std::log(p);
      }
      if (h > best_entropy + 1e-12) {
        best_entropy = h;
        branch_node = i;
      }
    }
    if (branch_node < 0 || best_entropy <= 1e-9) {
      // numerically integral but not pruned: the rounded labeling is optimal here
      offer(round_marginals(top.rel));
      continue;
    }
    for (int l = 0; l < L; ++l) {
      if (!top.mask[branch_node][l]) continue;
      LabelMask child = top.mask;
      std::fill(child[branch_node].begin(), child[branch_node].end(), 0);
      child[branch_node][l] = 1;
      solve_and_push(std::move(child));
    }
  }
  if (queue.empty()) final_bound = inc_value;

  res.labeling = incumbent;
  res.value = inc_value;
  res.upper_bound = std::max(final_bound, inc_value);
  res.fractional = root_fractional;
  return res;
}

OracleResult branch_and_bound(const FactorGraphInstance& instance,
                              const ParameterVector& params, double tol,
                              long node_budget, BnbStats* stats) {
  return branch_and_bound(make_potentials(instance, params), tol, node_budget, 200'000, stats);
}

// -------------------------------------------------------- loss-augmented tiers

OracleResult loss_augmented_oracle(const FactorGraphInstance& instance,
                                   const Labeling& truth, const LossSpec& spec,
                                   const ParameterVector& params, Tier tier,
                                   const OracleConfig& cfg) {
  const Potentials pot = make_potentials(loss_augment(instance, truth, spec), params);
  switch (tier) {
    case Tier::MOVE_MAKING:
      return move_making(pot, truth, cfg.move_restarts, cfg.seed);
    case Tier::EXACT:
      return branch_and_bound(pot, cfg.bnb_tol, cfg.bnb_node_budget, cfg.lp_max_pivots);
    case Tier::CACHE:
      break;
  }
  throw ValidationError("loss_augmented_oracle: CACHE tier is handled by the trainer");
}

}  // namespace ssvm
