#pragma once

#include "ssvm/inference.hpp"

#include <Eigen/Dense>

#include <vector>

namespace ssvm {

/// One aggregated one-slack cutting plane:
/// delta_psi = sum_i [psi(x_i, y_i) - psi(x_i, yhat_i)], loss_sum = sum_i loss.
struct JointConstraint {
  Eigen::VectorXd delta_psi;
  double loss_sum = 0.0;
  OracleQuality origin = OracleQuality::UNDER_GENERATING;
  int last_active_iteration = 0;
};

struct QPSolution {
  Eigen::VectorXd theta;   // = sum_j alpha_j * delta_psi_j
  double xi = 0.0;         // max_j (loss_sum_j - <theta, delta_psi_j>), clamped at 0
  Eigen::VectorXd alphas;  // one multiplier per working-set constraint
  double objective = 0.0;  // primal value 0.5 ||theta||^2 + C xi
};

/// Solves the restricted one-slack QP over the working set, in the dual:
///   max  sum_j a_j l_j - 0.5 || sum_j a_j dpsi_j ||^2
///   s.t. a_j >= 0, sum_j a_j <= C
/// by single-coordinate ascent plus pairwise transfers (which preserve the sum
/// when the box constraint is active), until the KKT residual is <= tol.
/// An empty working set yields theta = 0, xi = 0.
QPSolution solve_restricted_qp(const std::vector<JointConstraint>& working_set,
                               double C, double tol,
                               const Eigen::VectorXd* warm_start = nullptr);

/// KKT residual of a dual candidate (used by tests and the solver's stop rule).
double kkt_residual(const std::vector<JointConstraint>& working_set, double C,
                    const Eigen::VectorXd& alphas);

/// Working set with duplicate suppression and inactivity-based pruning.
class WorkingSet {
 public:
  /// Returns false (and drops the constraint) when an existing constraint has
  /// the same delta_psi and loss_sum within 1e-10.
  bool add(JointConstraint c);

  /// Solves the restricted QP, warm-starting from the previous multipliers,
  /// and updates the per-constraint zero-alpha streaks.
  QPSolution solve(double C, double tol, int iteration);

  /// Removes constraints whose alpha has been zero for >= patience consecutive
  /// solves. Never touches a constraint active in the latest solve.
  /// Returns the number of removed constraints.
  int prune_inactive(int current_iteration, int patience);

  std::size_t size() const { return constraints_.size(); }
  const std::vector<JointConstraint>& constraints() const { return constraints_; }

 private:
  std::vector<JointConstraint> constraints_;
  std::vector<int> zero_streak_;
  Eigen::VectorXd alphas_;
};

}  // namespace ssvm
