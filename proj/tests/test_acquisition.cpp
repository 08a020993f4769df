#include <doctest.h>

#include <cmath>
#include <limits>

#include "msce/acquisition.hpp"
#include "msce/rng.hpp"

using namespace msce;

namespace {

double contour_ei_monte_carlo(double mean, double sd, double level, double alpha, std::size_t n, double* se) {
  Rng rng(77);
  const double eps2 = std::pow(alpha * sd, 2);
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double y = mean + sd * rng.normal();
    const double v = eps2 - std::min(std::pow(y - level, 2), eps2);
    sum += v;
    sum2 += v * v;
  }
  const double m = sum / static_cast<double>(n);
  *se = std::sqrt((sum2 / static_cast<double>(n) - m * m) / static_cast<double>(n));
  return m;
}

}  // namespace

TEST_CASE("normal helpers") {
  CHECK(normal_pdf(0.0) == doctest::Approx(0.3989422804014327));
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
  CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975));
  CHECK(normal_cdf(-40.0) >= 0.0);
}

TEST_CASE("contour EI agrees with a Monte Carlo estimate") {
  struct Case {
    double mean, sd, level, alpha;
  };
  for (const Case c : {Case{0.0, 1.0, 0.0, 0.67}, Case{0.3, 0.5, 0.0, 0.67}, Case{-2.0, 1.5, 1.0, 1.0},
                       Case{5.0, 0.1, 5.05, 2.0}, Case{1.0, 2.0, -3.0, 0.5}}) {
    double se = 0.0;
    const double mc = contour_ei_monte_carlo(c.mean, c.sd, c.level, c.alpha, 200000, &se);
    const double exact = contour_ei(c.mean, c.sd, c.level, c.alpha);
    CHECK(std::abs(exact - mc) <= 4.0 * se + 1e-12);
  }
}

TEST_CASE("contour EI is non-negative and vanishes without uncertainty") {
  CHECK(contour_ei(1.0, 0.0, 1.0, 0.67) == 0.0);
  CHECK(contour_ei(1.0, 0.0, 3.0, 0.67) == 0.0);
  for (double mean = -50.0; mean <= 50.0; mean += 2.5) {
    for (double sd : {1e-6, 0.1, 1.0, 10.0}) CHECK(contour_ei(mean, sd, 0.0, 0.67) >= 0.0);
  }
  // On the contour the value is largest for a fixed sd.
  CHECK(contour_ei(0.0, 1.0, 0.0, 0.67) > contour_ei(0.5, 1.0, 0.0, 0.67));
}

TEST_CASE("global minimum EI") {
  CHECK(global_min_ei(1.0, 0.0, 2.0) == doctest::Approx(1.0));
  CHECK(global_min_ei(3.0, 0.0, 2.0) == 0.0);
  CHECK(global_min_ei(2.0, 1.0, 2.0) == doctest::Approx(normal_pdf(0.0)));
  CHECK(global_min_ei(100.0, 1.0, 0.0) >= 0.0);
}

TEST_CASE("implausibility takes the worst standardized distance") {
  const std::vector<double> p{1.0, 2.0}, sd{0.5, 2.0}, t{0.0, 0.0};
  CHECK(implausibility(p, sd, t) == doctest::Approx(2.0));
  const std::vector<double> exact{1.0}, zero{0.0}, level{1.0}, other{2.0};
  CHECK(implausibility(exact, zero, level) == 0.0);
  CHECK(std::isinf(implausibility(exact, zero, other)));
}

TEST_CASE("argmax skips training points and breaks ties low") {
  Eigen::MatrixXd candidates(4, 2);
  candidates << 0.1, 0.1, 0.5, 0.5, 0.7, 0.2, 0.9, 0.9;
  Eigen::MatrixXd training(1, 2);
  training << 0.5, 0.5;
  const std::vector<double> values{1.0, 5.0, 3.0, 3.0};
  const auto choice = argmax_on_candidates(values, candidates, training);
  CHECK(choice.row == 2);
  CHECK(choice.value == 3.0);

  Eigen::MatrixXd everything = candidates;
  CHECK_THROWS_AS(argmax_on_candidates(values, candidates, everything), std::runtime_error);
}

TEST_CASE("config validation") {
  AcquisitionConfig c;
  CHECK_NOTHROW(c.validate());
  c.alpha = 0.0;
  CHECK_THROWS(c.validate());
}
