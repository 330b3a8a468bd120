#include "ssvm/qp.hpp"

#include <cmath>

namespace ssvm {

namespace {

Eigen::MatrixXd gram(const std::vector<JointConstraint>& ws) {
  const int k = static_cast<int>(ws.size());
  Eigen::MatrixXd G(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j <= i; ++j) G(i, j) = G(j, i) = ws[i].delta_psi.dot(ws[j].delta_psi);
  return G;
}

double dual_value(const std::vector<JointConstraint>& ws, const Eigen::MatrixXd& G,
                  const Eigen::VectorXd& a) {
  double v = 0.0;
  for (size_t j = 0; j < ws.size(); ++j) v += a[j] * ws[j].loss_sum;
  return v - 0.5 * a.dot(G * a);
}

double primal_value(const std::vector<JointConstraint>& ws, double C,
                    const Eigen::VectorXd& a) {
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(ws[0].delta_psi.size());
  for (size_t j = 0; j < ws.size(); ++j)
    if (a[j] != 0.0) theta += a[j] * ws[j].delta_psi;
  double xi = 0.0;
  for (const auto& c : ws) xi = std::max(xi, c.loss_sum - theta.dot(c.delta_psi));
  return 0.5 * theta.squaredNorm() + C * xi;
}

double residual(const Eigen::VectorXd& g, const Eigen::VectorXd& a, double C, double sum) {
  // multiplier of the sum constraint: zero when slack, else the largest active gradient
  double beta = 0.0;
  if (sum >= C - 1e-12) {
    for (Eigen::Index j = 0; j < a.size(); ++j)
      if (a[j] > 1e-12) beta = std::max(beta, g[j]);
    beta = std::max(beta, 0.0);
  }
  double r = 0.0;
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    if (a[j] > 1e-12) r = std::max(r, std::abs(g[j] - beta));
    else r = std::max(r, std::max(g[j] - beta, 0.0));
  }
  return r;
}

}  // namespace

double kkt_residual(const std::vector<JointConstraint>& ws, double C,
                    const Eigen::VectorXd& a) {
  const Eigen::MatrixXd G = gram(ws);
  Eigen::VectorXd g(ws.size());
  const Eigen::VectorXd Ga = G * a;
  for (size_t j = 0; j < ws.size(); ++j) g[j] = ws[j].loss_sum - Ga[j];
  return residual(g, a, C, a.sum());
}

QPSolution solve_restricted_qp(const std::vector<JointConstraint>& ws, double C,
                               double tol, const Eigen::VectorXd* warm_start) {
  if (C <= 0.0) throw ValidationError("solve_restricted_qp: C must be positive");
  if (tol <= 0.0) throw ValidationError("solve_restricted_qp: tol must be positive");
  QPSolution sol;
  if (ws.empty()) {
    sol.theta = Eigen::VectorXd();
    sol.alphas = Eigen::VectorXd();
    return sol;
  }
  const int k = static_cast<int>(ws.size());
  const Eigen::Index dim = ws[0].delta_psi.size();
  for (const auto& c : ws) {
    if (c.delta_psi.size() != dim)
      throw ValidationError("solve_restricted_qp: inconsistent constraint dimensions");
    if (!c.delta_psi.allFinite() || !std::isfinite(c.loss_sum))
      throw ValidationError("solve_restricted_qp: non-finite constraint");
  }

  const Eigen::MatrixXd G = gram(ws);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(k);
  if (warm_start && warm_start->size() == k) {
    a = warm_start->cwiseMax(0.0);
    const double s = a.sum();
    if (s > C) a *= C / s;
  }
  Eigen::VectorXd g(k);  // gradient: loss - G a
  {
    const Eigen::VectorXd Ga = G * a;
    for (int j = 0; j < k; ++j) g[j] = ws[j].loss_sum - Ga[j];
  }
  double sum = a.sum();

  const int max_sweeps = 100000;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    // single-coordinate steps within the box {a_j >= 0, sum <= C}
    for (int j = 0; j < k; ++j) {
      const double cap = C - (sum - a[j]);
      double target;
      if (G(j, j) > 1e-15) {
        target = a[j] + g[j] / G(j, j);
      } else {
        target = g[j] > 0.0 ? cap : 0.0;  // linear in a_j
      }
      const double nj = std::clamp(target, 0.0, cap);
      const double d = nj - a[j];
      if (d != 0.0) {
        g -= d * G.col(j);
        sum += d;
        a[j] = nj;
      }
    }
    // pairwise transfers free up progress when the sum constraint is active
    if (sum >= C - 1e-12 && k > 1) {
      for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
          const double curv = G(i, i) - 2.0 * G(i, j) + G(j, j);
          const double slope = g[i] - g[j];
          double t;
          if (curv > 1e-15) t = slope / curv;
          else if (std::abs(slope) > 1e-15) t = slope > 0.0 ? a[j] : -a[i];
          else continue;
          t = std::clamp(t, -a[i], a[j]);
          if (t != 0.0) {
            a[i] += t;
            a[j] -= t;
            g -= t * (G.col(i) - G.col(j));
          }
        }
      }
    }
    const double r = residual(g, a, C, sum);
    if (r <= tol) break;
  }

  // Active-set polish: starting from the set coordinate ascent identified,
  // alternately solve the reduced KKT system exactly, drop coordinates that
  // go negative, and add the worst KKT violator, until the KKT conditions
  // hold at machine scale. Candidates are ranked by the PRIMAL objective:
  // near the optimum the dual is flat to machine precision while the primal
  // excess equals the largest leftover violation, which is exactly the error
  // the reported restricted objective carries. Taking the smallest feasible
  // primal keeps o_W monotone across successive solves.
  {
    std::vector<bool> in_set(k, false);
    for (int j = 0; j < k; ++j) in_set[j] = a[j] > 1e-10;

    auto solve_on = [&](const std::vector<int>& act, bool boundary,
                        Eigen::VectorXd& cand, double& beta) -> bool {
      const int m = static_cast<int>(act.size());
      const int n = m + (boundary ? 1 : 0);
      Eigen::MatrixXd K(n, n);
      Eigen::VectorXd rhs(n);
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) K(i, j) = G(act[i], act[j]);
        rhs[i] = ws[act[i]].loss_sum;
      }
      if (boundary) {
        for (int i = 0; i < m; ++i) K(i, m) = K(m, i) = 1.0;
        K(m, m) = 0.0;
        rhs[m] = C;
      }
      const Eigen::VectorXd z = K.completeOrthogonalDecomposition().solve(rhs);
      if (!z.allFinite()) return false;
      cand = Eigen::VectorXd::Zero(k);
      for (int i = 0; i < m; ++i) cand[act[i]] = z[i];
      beta = boundary ? z[m] : 0.0;
      return true;
    };

    Eigen::VectorXd best = a;
    double best_primal = primal_value(ws, C, a);
    for (int round = 0; round < 4 * k + 8; ++round) {
      std::vector<int> act;
      for (int j = 0; j < k; ++j)
        if (in_set[j]) act.push_back(j);
      if (act.empty()) break;

      Eigen::VectorXd cand;
      double beta = 0.0;
      bool solved = solve_on(act, false, cand, beta);
      if (solved && cand.sum() > C + 1e-12) solved = solve_on(act, true, cand, beta);
      if (!solved) break;
      if (beta < 0.0) beta = 0.0;

      // Drop the most negative coordinate, if any.
      int drop = -1;
      double most_negative = -1e-12;
      for (int j : act)
        if (cand[j] < most_negative) {
          most_negative = cand[j];
          drop = j;
        }
      if (drop >= 0) {
        in_set[drop] = false;
        continue;
      }

      Eigen::VectorXd clamped = cand.cwiseMax(0.0);
      if (clamped.sum() > C) clamped *= C / clamped.sum();
      const double value = primal_value(ws, C, clamped);
      if (value < best_primal) {
        best_primal = value;
        best = clamped;
      }

      // Add the worst KKT violator among the inactive coordinates.
      const Eigen::VectorXd grad = [&] {
        Eigen::VectorXd out(k);
        const Eigen::VectorXd Gc = G * cand;
        for (int j = 0; j < k; ++j) out[j] = ws[j].loss_sum - Gc[j];
        return out;
      }();
      int add = -1;
      double worst_violation = 1e-12;
      for (int j = 0; j < k; ++j)
        if (!in_set[j] && grad[j] - beta > worst_violation) {
          worst_violation = grad[j] - beta;
          add = j;
        }
      if (add < 0) break;
      in_set[add] = true;
    }
    a = best;
  }

  sol.alphas = a;
  sol.theta = Eigen::VectorXd::Zero(dim);
  for (int j = 0; j < k; ++j)
    if (a[j] != 0.0) sol.theta += a[j] * ws[j].delta_psi;
  double worst = 0.0;
  for (int j = 0; j < k; ++j)
    worst = std::max(worst, ws[j].loss_sum - sol.theta.dot(ws[j].delta_psi));
  sol.xi = worst;
  sol.objective = 0.5 * sol.theta.squaredNorm() + C * sol.xi;
  return sol;
}

bool WorkingSet::add(JointConstraint c) {
  for (const auto& e : constraints_) {
    if (std::abs(e.loss_sum - c.loss_sum) <= 1e-10 &&
        e.delta_psi.size() == c.delta_psi.size() &&
        (e.delta_psi - c.delta_psi).lpNorm<Eigen::Infinity>() <= 1e-10)
      return false;
  }
  constraints_.push_back(std::move(c));
  zero_streak_.push_back(0);
  Eigen::VectorXd na = Eigen::VectorXd::Zero(constraints_.size());
  na.head(alphas_.size()) = alphas_;
  alphas_ = std::move(na);
  return true;
}

QPSolution WorkingSet::solve(double C, double tol, int iteration) {
  QPSolution sol = solve_restricted_qp(constraints_, C, tol, &alphas_);
  alphas_ = sol.alphas;
  for (size_t j = 0; j < constraints_.size(); ++j) {
    if (alphas_[j] > 1e-12) {
      zero_streak_[j] = 0;
      constraints_[j].last_active_iteration = iteration;
    } else {
      ++zero_streak_[j];
    }
  }
  return sol;
}

int WorkingSet::prune_inactive(int current_iteration, int patience) {
  if (patience < 1) throw ValidationError("prune_inactive: patience must be >= 1");
  (void)current_iteration;
  int removed = 0;
  size_t w = 0;
  Eigen::VectorXd kept(alphas_.size());
  for (size_t j = 0; j < constraints_.size(); ++j) {
    if (zero_streak_[j] >= patience) {
      ++removed;
      continue;
    }
    constraints_[w] = std::move(constraints_[j]);
    zero_streak_[w] = zero_streak_[j];
    kept[w] = alphas_[j];
    ++w;
  }
  constraints_.resize(w);
  zero_streak_.resize(w);
  alphas_ = kept.head(w).eval();
  return removed;
}

}  // namespace ssvm
