#include "ssvm/simplex.hpp"

#include <limits>
#include <vector>

namespace ssvm {

namespace {
constexpr double kPivotEps = 1e-9;
constexpr double kFeasEps = 1e-7;
}  // namespace

SimplexResult simplex_max(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                          const Eigen::VectorXd& c, long max_pivots) {
  const Eigen::Index m = A.rows();
  const Eigen::Index n = A.cols();
  SimplexResult res;
  res.x = Eigen::VectorXd::Zero(n);

  // Tableau over structural columns [0, n) and artificial columns [n, n+m).
  Eigen::MatrixXd T(m, n + m);
  T.leftCols(n) = A;
  T.rightCols(m) = Eigen::MatrixXd::Identity(m, m);
  Eigen::VectorXd rhs = b;
  std::vector<Eigen::Index> basis(m);
  for (Eigen::Index i = 0; i < m; ++i) basis[i] = n + i;

  auto pivot = [&](Eigen::Index li, Eigen::Index ej, Eigen::RowVectorXd& d) {
    const double p = T(li, ej);
    T.row(li) /= p;
    rhs[li] /= p;
    for (Eigen::Index k = 0; k < m; ++k) {
      if (k == li) continue;
      const double f = T(k, ej);
      if (f != 0.0) {
        T.row(k) -= f * T.row(li);
        rhs[k] -= f * rhs[li];
      }
    }
    const double fd = d[ej];
    if (fd != 0.0) d -= fd * T.row(li);
    basis[li] = ej;
    ++res.pivots;
  };

  // Runs Bland-rule min-simplex on reduced costs d over columns [0, limit).
  // Returns false on iteration limit; sets unbounded when no leaving row exists.
  bool unbounded = false;
  auto run = [&](Eigen::RowVectorXd& d, Eigen::Index limit) {
    for (;;) {
      if (res.pivots >= max_pivots) return false;
      Eigen::Index ej = -1;
      for (Eigen::Index j = 0; j < limit; ++j)
        if (d[j] < -kPivotEps) { ej = j; break; }
      if (ej < 0) return true;  // optimal
      Eigen::Index li = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < m; ++i) {
        if (T(i, ej) > kPivotEps) {
          const double ratio = rhs[i] / T(i, ej);
          if (ratio < best - kPivotEps ||
              (ratio < best + kPivotEps && (li < 0 || basis[i] < basis[li]))) {
            best = ratio;
            li = i;
          }
        }
      }
      if (li < 0) { unbounded = true; return true; }
      pivot(li, ej, d);
    }
  };

  // Phase 1: minimize the sum of artificials.
  Eigen::RowVectorXd d1 = Eigen::RowVectorXd::Zero(n + m);
  for (Eigen::Index j = 0; j < n; ++j) d1[j] = -T.col(j).sum();
  if (!run(d1, n)) { res.status = SimplexResult::Status::IterationLimit; return res; }
  double infeas = 0.0;
  for (Eigen::Index i = 0; i < m; ++i)
    if (basis[i] >= n) infeas += rhs[i];
  if (infeas > kFeasEps) { res.status = SimplexResult::Status::Infeasible; return res; }

  // Drive remaining artificials out of the basis; rows with no structural
  // pivot are redundant and inert (all-zero on structural columns).
  for (Eigen::Index i = 0; i < m; ++i) {
    if (basis[i] < n) continue;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::abs(T(i, j)) > kPivotEps) {
        pivot(i, j, d1);
        break;
      }
    }
  }

  // Phase 2: minimize -c'x over structural columns only.
  Eigen::RowVectorXd d2 = Eigen::RowVectorXd::Zero(n + m);
  for (Eigen::Index j = 0; j < n; ++j) {
    double dj = -c[j];
    for (Eigen::Index i = 0; i < m; ++i)
      if (basis[i] < n) dj += c[basis[i]] * T(i, j);
    d2[j] = dj;
  }
  unbounded = false;
  if (!run(d2, n)) { res.status = SimplexResult::Status::IterationLimit; return res; }
  if (unbounded) { res.status = SimplexResult::Status::Unbounded; return res; }

  for (Eigen::Index i = 0; i < m; ++i)
    if (basis[i] < n) res.x[basis[i]] = rhs[i];
  res.value = c.dot(res.x);
  res.status = SimplexResult::Status::Optimal;
  return res;
}

}  // namespace ssvm
