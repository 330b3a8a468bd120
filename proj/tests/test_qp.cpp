#include <doctest.h>

#include "ssvm/qp.hpp"
#include "ssvm/simplex.hpp"

#include <random>

using namespace ssvm;

namespace {

JointConstraint make_constraint(const Eigen::VectorXd& dpsi, double loss_sum) {
  JointConstraint c;
  c.delta_psi = dpsi;
  c.loss_sum = loss_sum;
  return c;
}

// Dense grid search over the dual box {a >= 0, sum a <= C}, refined around the
// best cell. Independent of the solver under test.
double grid_search_dual(const std::vector<JointConstraint>& ws, double C) {
  int m = static_cast<int>(ws.size());
  auto dual_value = [&](const Eigen::VectorXd& a) {
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(ws[0].delta_psi.size());
    double lin = 0.0;
    for (int j = 0; j < m; ++j) {
      theta += a[j] * ws[j].delta_psi;
      lin += a[j] * ws[j].loss_sum;
    }
    return lin - 0.5 * theta.squaredNorm();
  };
  Eigen::VectorXd lo = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd hi = Eigen::VectorXd::Constant(m, C);
  double best = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_a = lo;
  const int steps = 14;
  for (int level = 0; level < 8; ++level) {
    Eigen::VectorXd a(m), width = (hi - lo) / steps;
    std::vector<int> idx(m, 0);
    while (true) {
      double sum = 0.0;
      for (int j = 0; j < m; ++j) {
        a[j] = lo[j] + idx[j] * width[j];
        sum += a[j];
      }
      if (sum <= C + 1e-12) {
        double v = dual_value(a);
        if (v > best) {
          best = v;
          best_a = a;
        }
      }
      int k = 0;
      while (k < m && ++idx[k] > steps) idx[k++] = 0;
      if (k == m) break;
    }
    for (int j = 0; j < m; ++j) {
      lo[j] = std::max(0.0, best_a[j] - width[j]);
      hi[j] = std::min(C, best_a[j] + width[j]);
    }
  }
  return best;
}

}  // namespace

TEST_CASE("empty working set: theta = 0, xi = 0, objective 0") {
  QPSolution s = solve_restricted_qp({}, 1.0, 1e-8);
  CHECK(s.theta.size() == 0);
  CHECK(s.xi == 0.0);
  CHECK(s.objective == 0.0);
}

TEST_CASE("single constraint, interior optimum: alpha = loss/||dpsi||^2") {
  // loss_sum 2, ||dpsi||^2 = 1, C = 10: unconstrained maximizer alpha = 2,
  // theta = 2 dpsi, margin met exactly, xi = 0, objective = 0.5 * 4 = 2.
  Eigen::VectorXd dpsi(2);
  dpsi << 1.0, 0.0;
  std::vector<JointConstraint> ws{make_constraint(dpsi, 2.0)};
  QPSolution s = solve_restricted_qp(ws, 10.0, 1e-10);
  CHECK(s.alphas[0] == doctest::Approx(2.0).scale(1).epsilon(1e-7));
  CHECK((s.theta - 2.0 * dpsi).cwiseAbs().maxCoeff() <= 1e-7);
  CHECK(s.xi == doctest::Approx(0.0).scale(1).epsilon(1e-7));
  CHECK(s.objective == doctest::Approx(2.0).scale(1).epsilon(1e-7));
}

TEST_CASE("single constraint, boundary optimum: alpha = C") {
  // Same constraint with C = 1: box binds, theta = dpsi,
  // xi = loss - <theta, dpsi> = 1, objective = 0.5 + 1 = 1.5.
  Eigen::VectorXd dpsi(2);
  dpsi << 1.0, 0.0;
  std::vector<JointConstraint> ws{make_constraint(dpsi, 2.0)};
  QPSolution s = solve_restricted_qp(ws, 1.0, 1e-10);
  CHECK(s.alphas[0] == doctest::Approx(1.0).scale(1).epsilon(1e-7));
  CHECK(s.xi == doctest::Approx(1.0).scale(1).epsilon(1e-7));
  CHECK(s.objective == doctest::Approx(1.5).scale(1).epsilon(1e-7));
}

TEST_CASE("solution invariants: feasibility, theta recovery, xi recovery") {
  std::mt19937_64 rng(101);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> upos(0.1, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    int m = 1 + static_cast<int>(rng() % 5), d = 1 + static_cast<int>(rng() % 4);
    double C = upos(rng);
    std::vector<JointConstraint> ws;
    for (int j = 0; j < m; ++j)
      ws.push_back(make_constraint(
          Eigen::VectorXd::NullaryExpr(d, [&] { return gauss(rng); }), upos(rng)));
    QPSolution s = solve_restricted_qp(ws, C, 1e-10);
    CHECK(s.alphas.minCoeff() >= -1e-12);
    CHECK(s.alphas.sum() <= C + 1e-8);
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(d);
    double xi = 0.0;
    for (int j = 0; j < m; ++j) {
      theta += s.alphas[j] * ws[j].delta_psi;
      xi = std::max(xi, ws[j].loss_sum - s.theta.dot(ws[j].delta_psi));
    }
    CHECK((theta - s.theta).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(s.xi == doctest::Approx(xi).scale(1).epsilon(1e-8));
    CHECK(s.objective ==
          doctest::Approx(0.5 * s.theta.squaredNorm() + C * s.xi)
              .scale(1).epsilon(1e-8));
    CHECK(kkt_residual(ws, C, s.alphas) <= 1e-7);
  }
}

TEST_CASE("complementary slackness at the optimum") {
  // alpha_j > 0 implies the j-th constraint attains the max violation xi
  // (up to tolerance); the multiplier on the box implies xi > 0 only when
  // sum alpha = C.
  std::mt19937_64 rng(103);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    int m = 2 + static_cast<int>(rng() % 3);
    std::vector<JointConstraint> ws;
    for (int j = 0; j < m; ++j)
      ws.push_back(make_constraint(
          Eigen::VectorXd::NullaryExpr(3, [&] { return gauss(rng); }),
          0.5 + 0.5 * (j + 1)));
    double C = 1.0;
    QPSolution s = solve_restricted_qp(ws, C, 1e-12);
    for (int j = 0; j < m; ++j) {
      double violation = ws[j].loss_sum - s.theta.dot(ws[j].delta_psi);
      if (s.alphas[j] > 1e-6) CHECK(violation >= s.xi - 1e-6);
    }
    if (s.xi > 1e-6) CHECK(s.alphas.sum() == doctest::Approx(C).scale(1).epsilon(1e-6));
  }
}

TEST_CASE("dual optimum matches refined grid search on small working sets") {
  std::mt19937_64 rng(107);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> upos(0.2, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    int m = 1 + static_cast<int>(rng() % 4), d = 1 + static_cast<int>(rng() % 3);
    double C = upos(rng);
    std::vector<JointConstraint> ws;
    for (int j = 0; j < m; ++j)
      ws.push_back(make_constraint(
          Eigen::VectorXd::NullaryExpr(d, [&] { return gauss(rng); }), upos(rng)));
    QPSolution s = solve_restricted_qp(ws, C, 1e-12);
    double ref = grid_search_dual(ws, C);
    // Dual value at the solver's multipliers versus the grid optimum; the
    // primal objective equals the dual value at optimality (strong duality).
    double lin = 0.0;
    for (int j = 0; j < m; ++j) lin += s.alphas[j] * ws[j].loss_sum;
    double dual = lin - 0.5 * s.theta.squaredNorm();
    CHECK(dual >= ref - 1e-4);
    CHECK(dual <= ref + 1e-4);
    CHECK(s.objective == doctest::Approx(dual).scale(1).epsilon(1e-6));
  }
}

TEST_CASE("appending a constraint never decreases the restricted objective") {
  std::mt19937_64 rng(109);
  std::normal_distribution<double> gauss(0.0, 1.0);
  WorkingSet ws;
  double prev = 0.0;
  for (int j = 0; j < 15; ++j) {
    ws.add(make_constraint(
        Eigen::VectorXd::NullaryExpr(4, [&] { return gauss(rng); }),
        0.5 + 0.1 * j));
    QPSolution s = ws.solve(1.0, 1e-10, j);
    CHECK(s.objective >= prev - 1e-9);
    prev = s.objective;
  }
}

TEST_CASE("duplicate constraints are suppressed") {
  Eigen::VectorXd dpsi(2);
  dpsi << 1.0, -1.0;
  WorkingSet ws;
  CHECK(ws.add(make_constraint(dpsi, 1.0)));
  CHECK_FALSE(ws.add(make_constraint(dpsi, 1.0)));
  Eigen::VectorXd nudged = dpsi;
  nudged[0] += 5e-11;  // within the 1e-10 suppression band
  CHECK_FALSE(ws.add(make_constraint(nudged, 1.0)));
  CHECK(ws.add(make_constraint(dpsi, 1.5)));  // same dpsi, different loss
  CHECK(ws.size() == 2);
}

TEST_CASE("pruning drops long-inactive constraints and preserves the objective") {
  std::mt19937_64 rng(113);
  std::normal_distribution<double> gauss(0.0, 1.0);
  WorkingSet ws;
  for (int j = 0; j < 5; ++j)
    ws.add(make_constraint(
        Eigen::VectorXd::NullaryExpr(3, [&] { return gauss(rng); }),
        0.3 + 0.3 * j));
  const int patience = 3;
  QPSolution before;
  for (int it = 0; it < patience + 1; ++it) before = ws.solve(1.0, 1e-12, it);
  int active = 0;
  for (int j = 0; j < static_cast<int>(before.alphas.size()); ++j)
    if (before.alphas[j] > 1e-10) ++active;
  int removed = ws.prune_inactive(patience + 1, patience);
  CHECK(removed == 5 - active);
  QPSolution after = ws.solve(1.0, 1e-12, patience + 2);
  CHECK(after.objective ==
        doctest::Approx(before.objective).scale(1).epsilon(1e-8));
}

TEST_CASE("pruning never touches constraints active in the latest solve") {
  Eigen::VectorXd d1(2), d2(2);
  d1 << 1.0, 0.0;
  d2 << 0.0, 1.0;
  WorkingSet ws;
  ws.add(make_constraint(d1, 1.0));
  ws.add(make_constraint(d2, 1.0));
  for (int it = 0; it < 50; ++it) ws.solve(10.0, 1e-12, it);
  CHECK(ws.prune_inactive(50, 20) == 0);
  CHECK(ws.size() == 2);
}

TEST_CASE("simplex: textbook maximization") {
  // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 -> optimum 36 at (2, 6).
  // Slack variables make the standard equality form.
  Eigen::MatrixXd A(3, 5);
  A << 1, 0, 1, 0, 0,
       0, 2, 0, 1, 0,
       3, 2, 0, 0, 1;
  Eigen::VectorXd b(3);
  b << 4, 12, 18;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(5);
  c[0] = 3;
  c[1] = 5;
  SimplexResult r = simplex_max(A, b, c);
  REQUIRE(r.status == SimplexResult::Status::Optimal);
  CHECK(r.value == doctest::Approx(36.0).scale(1).epsilon(1e-9));
  CHECK(r.x[0] == doctest::Approx(2.0).scale(1).epsilon(1e-9));
  CHECK(r.x[1] == doctest::Approx(6.0).scale(1).epsilon(1e-9));
}

TEST_CASE("simplex: detects infeasibility and unboundedness") {
  // x1 + x2 = -1 is infeasible after sign normalization forces x >= 0 sums.
  Eigen::MatrixXd A(2, 2);
  A << 1, 1, 1, 1;
  Eigen::VectorXd b(2);
  b << 1, 2;  // contradictory equalities
  Eigen::VectorXd c(2);
  c << 1, 0;
  CHECK(simplex_max(A, b, c).status == SimplexResult::Status::Infeasible);

  // max x with only x - y = 0: x can grow without bound.
  Eigen::MatrixXd A2(1, 2);
  A2 << 1, -1;
  Eigen::VectorXd b2(1);
  b2 << 0;
  Eigen::VectorXd c2(2);
  c2 << 1, 0;
  CHECK(simplex_max(A2, b2, c2).status == SimplexResult::Status::Unbounded);
}
