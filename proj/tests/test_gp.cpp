#include <doctest.h>

#include <cmath>

#include "gp_oracle.hpp"
#include "msce/design.hpp"
#include "msce/gp.hpp"
#include "msce/rng.hpp"

using namespace msce;

namespace {

Eigen::VectorXd branin_like(const Eigen::MatrixXd& x) {
  Eigen::VectorXd y(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    y(i) = std::sin(6.0 * x(i, 0)) + 2.0 * x(i, 1) * x(i, 1) - x(i, 0) * x(i, 1);
  }
  return y;
}

GpConfig zero_nugget() {
  GpConfig c;
  c.nugget_policy = NuggetPolicy::fixed;
  c.nugget = 0.0;
  return c;
}

}  // namespace

TEST_CASE("fixed-theta surrogate matches the dense-matrix oracle") {
  SUBCASE("three points in one dimension") {
    Eigen::MatrixXd x(3, 1);
    x << 0.1, 0.5, 0.9;
    Eigen::VectorXd y(3);
    y << 1.0, -0.5, 2.0;
    const auto model = GpModel::with_theta(x, y, {3.0}, zero_nugget());
    const test::DenseKriging oracle(x, y, {3.0}, 1.95, 0.0);
    CHECK(model.mu() == doctest::Approx(oracle.mu).epsilon(1e-10));
    CHECK(model.sigma2() == doctest::Approx(oracle.sigma2).epsilon(1e-10));
    CHECK(model.log_likelihood() == doctest::Approx(oracle.log_likelihood).epsilon(1e-10));
    for (double t : {0.0, 0.3, 0.77, 1.0}) {
      double mean = 0.0, variance = 0.0;
      oracle.predict(Eigen::RowVectorXd::Constant(1, t), mean, variance);
      const auto p = model.predict(std::vector<double>{t});
      CHECK(std::fabs(p.mean - mean) < 1e-10);
      CHECK(std::fabs(p.variance - variance) < 1e-10);
    }
  }
  SUBCASE("ten points in two dimensions with a nugget") {
    const auto design = lhd(10, 2, 3, LhdCriterion::maximin, 200);
    const Eigen::VectorXd y = branin_like(design.points);
    GpConfig c;
    c.nugget_policy = NuggetPolicy::fixed;
    c.nugget = 1e-6;
    const auto model = GpModel::with_theta(design.points, y, {4.0, 1.5}, c);
    const test::DenseKriging oracle(design.points, y, {4.0, 1.5}, 1.95, 1e-6);
    Rng rng(4);
    for (int i = 0; i < 25; ++i) {
      Eigen::RowVectorXd point(2);
      point << rng.uniform(), rng.uniform();
      double mean = 0.0, variance = 0.0;
      oracle.predict(point, mean, variance);
      const auto p = model.predict(std::vector<double>{point(0), point(1)});
      CHECK(std::fabs(p.mean - mean) < 1e-10);
      CHECK(std::fabs(p.variance - variance) < 1e-10);
    }
  }
}

TEST_CASE("zero-nugget fit interpolates the training data") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto design = lhd(10, 2, seed, LhdCriterion::random, 0, true);
    const Eigen::VectorXd y = branin_like(design.points);
    GpConfig c = zero_nugget();
    c.seed = seed;
    const auto model = GpModel::fit(design.points, y, c);
    for (Eigen::Index i = 0; i < design.points.rows(); ++i) {
      const auto p = model.predict(std::vector<double>{design.points(i, 0), design.points(i, 1)});
      CHECK(std::fabs(p.mean - y(i)) < 1e-6);
      CHECK(p.variance <= 1e-8 * model.sigma2() + 1e-300);
    }
  }
}

TEST_CASE("fitted likelihood is at least that of every start") {
  const auto design = lhd(14, 2, 8, LhdCriterion::maxpro, 200);
  const auto model = GpModel::fit(design.points, branin_like(design.points));
  REQUIRE(model.starts().size() >= 5);
  for (const auto& start : model.starts()) CHECK(model.log_likelihood() >= start.log_likelihood - 1e-9);
  for (double t : model.theta()) {
    CHECK(t >= 1e-2 * (1 - 1e-12));
    CHECK(t <= 1e2 * (1 + 1e-12));
  }
}

TEST_CASE("a warm start is one of the recorded starts") {
  const auto design = lhd(12, 2, 5, LhdCriterion::maxpro, 200);
  GpConfig c;
  c.initial_theta = {2.0, 3.0};
  const auto model = GpModel::fit(design.points, branin_like(design.points), c);
  const auto& last = model.starts().back().theta;
  CHECK(last[0] == doctest::Approx(2.0));
  CHECK(last[1] == doctest::Approx(3.0));
}

TEST_CASE("profiled estimates follow their closed forms") {
  const auto design = lhd(9, 2, 21, LhdCriterion::maximin, 100);
  const Eigen::VectorXd y = branin_like(design.points);
  const auto model = GpModel::fit(design.points, y);
  const test::DenseKriging oracle(design.points, y, model.theta(), 1.95, model.nugget());
  CHECK(model.mu() == doctest::Approx(oracle.mu).epsilon(1e-8));
  CHECK(model.sigma2() == doctest::Approx(oracle.sigma2).epsilon(1e-8));
}

TEST_CASE("variance is non-negative and prediction is deterministic") {
  const auto design = lhd(15, 2, 2, LhdCriterion::maxpro, 200);
  const auto model = GpModel::fit(design.points, branin_like(design.points));
  const auto cands = lhd(500, 2, 77, LhdCriterion::random, 0, true).points;
  std::vector<double> m1(500), v1(500), m2(500), v2(500);
  model.predict(cands, m1, v1);
  model.predict(cands, m2, v2);
  CHECK(m1 == m2);
  CHECK(v1 == v2);
  for (double v : v1) CHECK(v >= 0.0);
}

TEST_CASE("json dump rebuilds identical predictions") {
  const auto design = lhd(12, 2, 6, LhdCriterion::maxpro, 100);
  const auto model = GpModel::fit(design.points, branin_like(design.points));
  const auto copy = GpModel::from_json(nlohmann::json::parse(model.to_json().dump()));
  for (double a : {0.1, 0.45, 0.93}) {
    const std::vector<double> p{a, 1.0 - a};
    CHECK(copy.predict(p).mean == model.predict(p).mean);
    CHECK(copy.predict(p).variance == model.predict(p).variance);
  }
}

TEST_CASE("invalid training data is rejected") {
  Eigen::MatrixXd dup(3, 2);
  dup << 0.1, 0.2, 0.5, 0.5, 0.1, 0.2;
  CHECK_THROWS_AS(GpModel::fit(dup, Eigen::Vector3d(1, 2, 3)), std::invalid_argument);
  Eigen::MatrixXd one(1, 2);
  one << 0.5, 0.5;
  CHECK_THROWS_AS(GpModel::fit(one, Eigen::VectorXd::Ones(1)), std::invalid_argument);
  GpConfig bad;
  bad.smoothness = 2.5;
  CHECK_THROWS_AS(bad.validate(2), std::invalid_argument);
}

TEST_CASE("constant outputs give zero process variance") {
  const auto design = lhd(6, 2, 1, LhdCriterion::random);
  const auto model = GpModel::fit(design.points, Eigen::VectorXd::Constant(6, 4.0));
  CHECK(model.mu() == doctest::Approx(4.0));
  CHECK(model.sigma2() == doctest::Approx(0.0));
  CHECK(model.predict(std::vector<double>{0.3, 0.3}).mean == doctest::Approx(4.0));
}

TEST_CASE("correlation matrix has a unit diagonal and is symmetric") {
  const auto design = lhd(7, 3, 4, LhdCriterion::random);
  const std::vector<double> theta{1.0, 2.0, 0.5}, p{1.95, 1.95, 1.95};
  const Eigen::MatrixXd r = correlation_matrix(design.points, theta, p);
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    CHECK(r(i, i) == doctest::Approx(1.0));
    for (Eigen::Index j = 0; j < r.cols(); ++j) CHECK(r(i, j) == doctest::Approx(r(j, i)).epsilon(1e-15));
  }
}
