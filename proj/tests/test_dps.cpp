#include <doctest.h>

#include <chrono>
#include <cmath>

#include "msce/dps.hpp"
#include "test_support.hpp"

using namespace msce;

namespace {

TimeSeries easom_target() {
  return evaluate(SimulatorSpec::standard(SimulatorKind::easom), std::vector<double>{0.8, 0.2});
}

TimeSeries smooth_series(std::size_t length) {
  const auto grid = TimeGrid::equidistant(0.0, 1.0, length);
  std::vector<double> v(length);
  for (std::size_t j = 0; j < length; ++j) v[j] = std::sin(9.0 * grid[j]) + std::exp(-30.0 * std::pow(grid[j] - 0.6, 2));
  return {grid, v};
}

// Least-squares fit on the truncated power basis 1, t, t^2, t^3, (t - k)_+^3:
// the same column space as a cubic B-spline with simple interior knots.
std::vector<double> truncated_power_fit(const TimeSeries& s, const std::vector<std::size_t>& knots) {
  const auto n = static_cast<Eigen::Index>(s.size());
  Eigen::MatrixXd b(n, 4 + static_cast<Eigen::Index>(knots.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = s.grid[static_cast<std::size_t>(i)];
    b(i, 0) = 1.0;
    b(i, 1) = t;
    b(i, 2) = t * t;
    b(i, 3) = t * t * t;
    for (std::size_t k = 0; k < knots.size(); ++k) {
      const double gap = std::max(t - s.grid[knots[k] - 1], 0.0);
      b(i, 4 + static_cast<Eigen::Index>(k)) = gap * gap * gap;
    }
  }
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(s.values.data(), n);
  const Eigen::VectorXd coef = b.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd fitted = b * coef;
  return {fitted.data(), fitted.data() + n};
}

}  // namespace

TEST_CASE("spline fit spans the cubic regression-spline space") {
  const auto s = smooth_series(120);
  for (const std::vector<std::size_t>& knots :
       {std::vector<std::size_t>{}, std::vector<std::size_t>{60}, std::vector<std::size_t>{30, 75, 90}}) {
    const auto fit = spline_fit(s, knots);
    const auto oracle = truncated_power_fit(s, knots);
    CHECK(fit.rank == 4 + knots.size());
    CHECK_FALSE(fit.rank_deficient);
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(fit.fitted[i] == doctest::Approx(oracle[i]).epsilon(1e-8).scale(1.0));
    double sse = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) sse += std::pow(s.values[i] - fit.fitted[i], 2);
    CHECK(fit.mse == doctest::Approx(sse / static_cast<double>(s.size())).epsilon(1e-10));
  }
}

TEST_CASE("knot order does not change the fit") {
  const auto s = smooth_series(100);
  const std::vector<std::size_t> a{20, 50, 80}, b{80, 20, 50};
  CHECK(spline_fit(s, a).mse == doctest::Approx(spline_fit(s, b).mse).epsilon(1e-12));
}

TEST_CASE("boundary knots give a rank-deficient but valid fit") {
  const auto s = smooth_series(50);
  const std::vector<std::size_t> at_edge{1};
  const auto fit = spline_fit(s, at_edge);
  CHECK(fit.rank_deficient);
  CHECK(fit.mse == doctest::Approx(spline_fit(s, {}).mse).epsilon(1e-9));
  const std::vector<std::size_t> repeated{10, 10};
  CHECK_THROWS_AS(spline_fit(s, repeated), std::invalid_argument);
  const std::vector<std::size_t> outside{51};
  CHECK_THROWS_AS(spline_fit(s, outside), std::invalid_argument);
}

TEST_CASE("design matrix rows sum to one over the B-spline columns") {
  const auto grid = TimeGrid::equidistant(0.0, 1.0, 40);
  const std::vector<double> knots{0.3, 0.55};
  const Eigen::MatrixXd b = spline_design_matrix(grid.values(), knots);
  REQUIRE(b.cols() == 6);
  // Dropping the first basis function leaves 1 - B_1(t) in the bs() columns.
  for (Eigen::Index i = 0; i < b.rows(); ++i) {
    CHECK(b(i, 0) == 1.0);
    CHECK(b.row(i).tail(5).sum() <= 1.0 + 1e-12);
  }
  CHECK(b.row(b.rows() - 1).tail(5).sum() == doctest::Approx(1.0));
}

TEST_CASE("greedy knot search on easom matches the independent reference") {
  const auto golden = test::load_json("easom_golden.json");
  const auto result = sequential_knot_search(easom_target(), 10);
  const auto expected = golden["greedy_knots"].get<std::vector<std::size_t>>();
  CHECK(result.knots == expected);
  const auto curve = golden["mse_curve"].get<std::vector<double>>();
  REQUIRE(result.mse_curve.size() == curve.size());
  for (std::size_t k = 0; k < curve.size(); ++k) CHECK(result.mse_curve[k] == doctest::Approx(curve[k]).epsilon(1e-6));
  CHECK(result.selected_k == 3);
  CHECK(result.dps() == std::vector<std::size_t>{145, 37, 132});

  const std::vector<std::size_t> three{145, 37, 132};
  const auto fit = spline_fit(easom_target(), three);
  const auto fitted = golden["fit_145_37_132"]["fitted"].get<std::vector<double>>();
  for (std::size_t i = 0; i < fitted.size(); ++i) CHECK(fit.fitted[i] == doctest::Approx(fitted[i]).epsilon(1e-7).scale(1e-8));
}

TEST_CASE("sequential fit count follows the scan size") {
  const auto s = smooth_series(60);
  for (std::size_t k = 1; k <= 5; ++k) {
    const auto r = sequential_knot_search(s, k);
    CHECK(r.fit_count == k * 60 - k * (k - 1) / 2);
    CHECK(r.fit_count == search_cost(60, k, KnotSearchMode::sequential));
    CHECK(r.extra_fits == 1);
    CHECK(r.mse_curve.size() == k + 1);
  }
  CHECK_THROWS_AS(sequential_knot_search(s, 30), std::invalid_argument);
  CHECK_THROWS_AS(sequential_knot_search(s, 0), std::invalid_argument);
}

TEST_CASE("greedy mse curve never increases") {
  const auto r = sequential_knot_search(smooth_series(80), 8);
  for (std::size_t k = 1; k < r.mse_curve.size(); ++k) CHECK(r.mse_curve[k] <= r.mse_curve[k - 1] * (1 + 1e-12));
}

TEST_CASE("elbow rules") {
  SUBCASE("raw second difference on a halving curve") {
    std::vector<double> c;
    for (int k = 0; k <= 6; ++k) c.push_back(std::pow(2.0, -k));
    const auto e = elbow(c, ElbowRule::second_difference);
    CHECK(e.k == 1);
    CHECK_FALSE(e.fallback);
  }
  SUBCASE("linear curve falls back to the minimum") {
    const std::vector<double> c{10, 9, 8, 7, 6, 5};
    const auto e = elbow(c, ElbowRule::second_difference);
    CHECK(e.fallback);
    CHECK(e.k == 5);
  }
  SUBCASE("log gain stops where the relative gain shrinks") {
    // Reductions by factors 2, 8, 4: the third knot gains less than the second.
    const std::vector<double> c{1.0, 0.5, 0.0625, 0.015625, 0.0078125};
    CHECK(elbow(c, ElbowRule::log_gain).k == 3);
  }
  SUBCASE("too short") {
    const std::vector<double> c{1.0, 0.5};
    CHECK_THROWS(elbow(c));
  }
  CHECK(elbow_rule_from_string("log_gain") == ElbowRule::log_gain);
  CHECK(elbow_rule_from_string("second_difference") == ElbowRule::second_difference);
  CHECK_THROWS(elbow_rule_from_string("knee"));
}

TEST_CASE("simultaneous search") {
  const auto s = smooth_series(40);
  SUBCASE("exhaustive single knot equals the first greedy knot") {
    const auto all = simultaneous_knot_search(s, 1, 1, 0, true);
    const auto greedy = sequential_knot_search(s, 1);
    CHECK(all.knots == greedy.knots);
    CHECK(all.mse_curve.back() == doctest::Approx(greedy.mse_curve.back()));
  }
  SUBCASE("random subsets are no worse than the greedy answer") {
    const auto r = simultaneous_knot_search(s, 3, 200, 5);
    const auto greedy = sequential_knot_search(s, 3);
    CHECK(r.mse_curve.back() <= greedy.mse_curve.back() * (1 + 1e-12));
    CHECK(r.knots.size() == 3);
    CHECK(r.fit_count == 200);
    const auto again = simultaneous_knot_search(s, 3, 200, 5);
    CHECK(again.knots == r.knots);
  }
  CHECK(search_cost(200, 2, KnotSearchMode::simultaneous) == 600);
}

TEST_CASE("report json carries the selection") {
  const auto r = sequential_knot_search(easom_target(), 5);
  const auto j = r.to_json();
  CHECK(j["dps"].get<std::vector<std::size_t>>() == r.dps());
  CHECK(j["selected_k"] == r.selected_k);
  CHECK(j["elbow_rule"] == "log_gain");
}
