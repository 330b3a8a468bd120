#pragma once

#include <Eigen/Dense>

namespace ssvm {

/// Dense two-phase primal simplex for
///   max c'x  s.t.  A x = b, x >= 0,
/// with b >= 0. Bland's rule throughout, so the method terminates on
/// degenerate problems.
struct SimplexResult {
  enum class Status { Optimal, IterationLimit, Infeasible, Unbounded };
  Eigen::VectorXd x;
  double value = 0.0;
  Status status = Status::Optimal;
  long pivots = 0;
};

SimplexResult simplex_max(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                          const Eigen::VectorXd& c, long max_pivots = 200000);

}  // namespace ssvm
