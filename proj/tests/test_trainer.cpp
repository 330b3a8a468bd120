#include <doctest.h>

#include "ssvm/synthetic.hpp"
#include "ssvm/trainer.hpp"

#include <random>

using namespace ssvm;

namespace {

// One sample, one node, L = 2, d_u = 1, unit feature: the smallest SVM.
Dataset single_node_dataset() {
  Dataset ds;
  ds.num_labels = 2;
  ds.d_u = 1;
  ds.d_p = 1;
  ds.symmetric = true;
  Sample s;
  s.instance.node_count = 1;
  s.instance.num_labels = 2;
  s.instance.unary_features = Eigen::MatrixXd::Ones(1, 1);
  s.instance.edge_features = Eigen::MatrixXd::Zero(1, 0);
  s.truth = Labeling::Zero(1);
  s.loss = LossSpec::unit(1);
  ds.samples.push_back(std::move(s));
  return ds;
}

TrainConfig quiet_config() {
  TrainConfig cfg;
  cfg.workers = 1;
  return cfg;
}

}  // namespace

TEST_CASE("schedule_next_tier follows the strict half-gap test") {
  // Stay on the cache iff o_C - o_Q < (o_Q - o_W) / 2.
  CHECK(schedule_next_tier(8.0, 9.0, 7.0, Tier::MOVE_MAKING) == Tier::CACHE);
  // Boundary: 10 - 9 = 1 is not < (9 - 7) / 2 = 1, so escalate.
  CHECK(schedule_next_tier(10.0, 9.0, 7.0, Tier::MOVE_MAKING) == Tier::MOVE_MAKING);
  CHECK(schedule_next_tier(9.4, 9.0, 7.0, Tier::EXACT) == Tier::CACHE);
}

TEST_CASE("generate_constraint at theta = 0 is dominated by the loss") {
  Dataset ds = generate_synthetic(2, 2, 2, 0.5, 3, 11);
  Trainer trainer(ds, quiet_config());
  ParameterVector theta = ParameterVector::zero(2, ds.d_u, ds.d_p, ds.symmetric);
  auto res = trainer.generate_constraint(theta, Tier::EXACT);
  CHECK_FALSE(res.refused);
  CHECK(res.constraint.loss_sum == doctest::Approx(static_cast<double>(ds.total_nodes())));
  CHECK(res.xi_prime == doctest::Approx(static_cast<double>(ds.total_nodes())));
  CHECK(res.all_certified);
}

TEST_CASE("aggregated delta_psi equals the sum of per-sample constraints") {
  Dataset ds = generate_synthetic(2, 2, 2, 1.0, 2, 13);
  TrainConfig cfg = quiet_config();
  ParameterVector theta = ParameterVector::zero(2, ds.d_u, ds.d_p, ds.symmetric);

  Trainer joint(ds, cfg);
  auto whole = joint.generate_constraint(theta, Tier::EXACT);

  Eigen::VectorXd sum = Eigen::VectorXd::Zero(whole.constraint.delta_psi.size());
  double loss_sum = 0.0;
  for (const Sample& s : ds.samples) {
    Dataset one = ds;
    one.samples = {s};
    Trainer single(one, cfg);
    auto part = single.generate_constraint(theta, Tier::EXACT);
    sum += part.constraint.delta_psi;
    loss_sum += part.constraint.loss_sum;
  }
  CHECK((whole.constraint.delta_psi - sum).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(whole.constraint.loss_sum == doctest::Approx(loss_sum).scale(1).epsilon(1e-9));
}

TEST_CASE("cache_lookup refuses on empty caches") {
  Dataset ds = single_node_dataset();
  Trainer trainer(ds, quiet_config());
  ParameterVector theta = ParameterVector::zero(2, 1, 1, true);
  CHECK(trainer.cache_lookup(theta).refused);
}

TEST_CASE("cache holding only the truth yields loss 0 and no violation") {
  Dataset ds = single_node_dataset();
  TrainConfig cfg = quiet_config();
  Trainer trainer(ds, cfg);
  // Seed the cache by an exact call at a theta whose augmented argmax is the
  // truth itself: strongly favor label 0 (margin above the unit loss).
  ParameterVector strong = ParameterVector::zero(2, 1, 1, true);
  strong.unary(0, 0) = 10.0;
  trainer.generate_constraint(strong, Tier::EXACT);
  REQUIRE(trainer.caches()[0].size() == 1);
  REQUIRE(trainer.caches()[0].front() == ds.samples[0].truth);

  auto res = trainer.cache_lookup(strong);
  CHECK_FALSE(res.refused);
  CHECK(res.constraint.loss_sum == doctest::Approx(0.0));
  // Violation = loss - <theta, dpsi> = 0 for the truth itself.
  CHECK(res.constraint.loss_sum -
            strong.flat().dot(res.constraint.delta_psi) <=
        1e-12);
}

TEST_CASE("cache_lookup right after an exact call reproduces that constraint") {
  Dataset ds = generate_synthetic(2, 2, 2, 1.0, 2, 17);
  Trainer trainer(ds, quiet_config());
  ParameterVector theta = ParameterVector::zero(2, ds.d_u, ds.d_p, ds.symmetric);
  auto fresh = trainer.generate_constraint(theta, Tier::EXACT);
  auto cached = trainer.cache_lookup(theta);
  CHECK_FALSE(cached.refused);
  CHECK((fresh.constraint.delta_psi - cached.constraint.delta_psi)
            .cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(cached.constraint.loss_sum ==
        doctest::Approx(fresh.constraint.loss_sum).scale(1).epsilon(1e-12));
}

TEST_CASE("cache_lookup picks the more violated of two entries") {
  Dataset ds = single_node_dataset();
  Trainer trainer(ds, quiet_config());
  // Fill the cache with both labelings: truth (via strong theta) and the
  // wrong label (via theta = 0, where the loss dominates).
  ParameterVector strong = ParameterVector::zero(2, 1, 1, true);
  strong.unary(0, 0) = 10.0;
  trainer.generate_constraint(strong, Tier::EXACT);
  ParameterVector zero = ParameterVector::zero(2, 1, 1, true);
  trainer.generate_constraint(zero, Tier::EXACT);
  REQUIRE(trainer.caches()[0].size() == 2);

  // At theta = 0 the wrong label has violation 1, the truth 0.
  auto res = trainer.cache_lookup(zero);
  CHECK(res.constraint.loss_sum == doctest::Approx(1.0));
  CHECK(res.xi_prime == doctest::Approx(1.0));
}

TEST_CASE("single-node SVM learns the closed-form margin") {
  // With C large the learned theta separates label 0 from label 1 by the full
  // unit loss: theta_u = (1/2, -1/2), margin exactly 1.
  Dataset ds = single_node_dataset();
  TrainConfig cfg = quiet_config();
  cfg.C = 100.0;
  cfg.epsilon = 1e-6;
  FitResult fr = fit(ds, cfg);
  CHECK(fr.certificate.certified);
  double s0 = fr.params.unary(0, 0), s1 = fr.params.unary(1, 0);
  CHECK(s0 - s1 >= 1.0 - 1e-4);
  CHECK(s0 == doctest::Approx(0.5).scale(1).epsilon(1e-4));
  CHECK(s1 == doctest::Approx(-0.5).scale(1).epsilon(1e-4));
}

TEST_CASE("separable noiseless data certifies with near-zero slack") {
  Dataset ds = generate_synthetic(3, 3, 3, 0.0, 4, 19);
  TrainConfig cfg = quiet_config();
  FitResult fr = fit(ds, cfg);
  CHECK(fr.certificate.certified);
  CHECK(fr.certificate.gap <= cfg.C * cfg.epsilon + 1e-6);
  CHECK(fr.certificate.lower <= fr.certificate.upper + 1e-9);
}

TEST_CASE("o_W is non-decreasing and bounds are ordered on a real run") {
  Dataset ds = generate_synthetic(3, 3, 2, 1.0, 3, 23);
  TrainConfig cfg = quiet_config();
  FitResult fr = fit(ds, cfg);
  REQUIRE(fr.certificate.certified);
  double prev = -std::numeric_limits<double>::infinity();
  int last_iter = -1;
  for (const TraceRow& row : fr.trace) {
    CHECK(row.iteration > last_iter);
    last_iter = row.iteration;
    CHECK(row.o_W >= prev - 1e-9);
    prev = row.o_W;
    if (row.tier == Tier::EXACT) CHECK(row.o_I >= row.o_W - 1e-9);
  }
  CHECK(fr.certificate.gap <= cfg.C * cfg.epsilon + 1e-6);
}

TEST_CASE("exact-tier constraints satisfy xi_prime >= xi") {
  Dataset ds = generate_synthetic(3, 3, 2, 1.0, 3, 29);
  TrainConfig cfg = quiet_config();
  FitResult fr = fit(ds, cfg);
  for (const TraceRow& row : fr.trace)
    if (row.tier == Tier::EXACT) CHECK(row.xi_prime >= row.xi - 1e-9);
}

TEST_CASE("identical config and seed reproduce the trace exactly") {
  Dataset ds = generate_synthetic(3, 3, 3, 1.0, 2, 31);
  TrainConfig cfg = quiet_config();
  cfg.workers = 4;  // determinism must not depend on the worker count
  FitResult a = fit(ds, cfg);
  FitResult b = fit(ds, cfg);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].iteration == b.trace[i].iteration);
    CHECK(a.trace[i].tier == b.trace[i].tier);
    CHECK(a.trace[i].o_W == b.trace[i].o_W);
    CHECK(a.trace[i].o_I == b.trace[i].o_I);
    CHECK(a.trace[i].oracle_calls == b.trace[i].oracle_calls);
  }
  CHECK((a.params.flat() - b.params.flat()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("move-only ladder never certifies; exact ladder does") {
  Dataset ds = generate_synthetic(3, 3, 2, 1.0, 2, 37);
  TrainConfig move_only = quiet_config();
  move_only.ladder = {Tier::MOVE_MAKING};
  FitResult fr = fit(ds, move_only);
  CHECK_FALSE(fr.certificate.certified);

  TrainConfig full = quiet_config();
  FitResult fe = fit(ds, full);
  CHECK(fe.certificate.certified);
  // The final restricted objective of the under-generating run can never
  // exceed the certified optimum.
  CHECK(fr.final_o_W <= fe.certificate.upper + 1e-7);
}

TEST_CASE("config validation rejects nonsense") {
  Dataset ds = single_node_dataset();
  TrainConfig cfg = quiet_config();
  cfg.C = -1.0;
  CHECK_THROWS_AS(fit(ds, cfg), ValidationError);
  cfg = quiet_config();
  cfg.epsilon = 0.0;
  CHECK_THROWS_AS(fit(ds, cfg), ValidationError);
  cfg = quiet_config();
  cfg.ladder = {};
  CHECK_THROWS_AS(fit(ds, cfg), ValidationError);
  cfg = quiet_config();
  cfg.ladder = {Tier::CACHE};  // cache alone can never make progress
  CHECK_THROWS_AS(fit(ds, cfg), ValidationError);

  Dataset empty;
  empty.num_labels = 2;
  empty.d_u = 1;
  empty.d_p = 1;
  CHECK_THROWS_AS(fit(empty, quiet_config()), ValidationError);
}
