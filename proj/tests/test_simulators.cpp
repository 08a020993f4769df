#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "msce/simulators.hpp"
#include "test_support.hpp"

using namespace msce;

TEST_CASE("equidistant grid") {
  const auto grid = TimeGrid::equidistant(0.0, 1.0, 200);
  CHECK(grid.size() == 200);
  CHECK(grid.front() == 0.0);
  CHECK(grid.back() == 1.0);
  CHECK(grid[1] == doctest::Approx(1.0 / 199.0));
  CHECK_THROWS_AS(TimeGrid::equidistant(0.0, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(TimeGrid::equidistant(1.0, 0.0, 5), std::invalid_argument);
}

TEST_CASE("grid from values rejects uneven or decreasing points") {
  CHECK_NOTHROW(TimeGrid::from_values({0.0, 0.5, 1.0}));
  CHECK_THROWS_AS(TimeGrid::from_values({0.0, 0.4, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(TimeGrid::from_values({0.0, 1.0, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(TimeGrid::from_values({0.0}), std::invalid_argument);
}

TEST_CASE("easom series matches the independent reference") {
  const auto golden = test::load_json("easom_golden.json");
  const auto spec = SimulatorSpec::standard(SimulatorKind::easom);
  const std::vector<double> x0{0.8, 0.2};
  const auto series = evaluate(spec, x0);
  const auto expected = golden["target"].get<std::vector<double>>();
  REQUIRE(series.size() == expected.size());
  for (std::size_t j = 0; j < expected.size(); ++j) {
    CHECK(series.values[j] == doctest::Approx(expected[j]).epsilon(1e-12).scale(1e-30));
  }
}

TEST_CASE("formulas at hand-computed points") {
  const double pi = std::numbers::pi;
  SUBCASE("easom at t = 0") {
    const auto s = evaluate(SimulatorSpec::standard(SimulatorKind::easom), std::vector<double>{0.5, 0.5});
    CHECK(s.values[0] == doctest::Approx(std::cos(0.5) * std::cos(0.5) * std::exp(-0.25 - (0.5 - pi) * (0.5 - pi))));
  }
  SUBCASE("harari at t = 1") {
    const auto s = evaluate(SimulatorSpec::standard(SimulatorKind::harari), std::vector<double>{0.5, 0.25, 0.75});
    CHECK(s.values.back() == doctest::Approx(std::exp(2.5) * std::cos(1.5 + 2.0 - 6.0 - 6.0)));
  }
  SUBCASE("levy at t = 0 reduces to the input terms") {
    const auto s = evaluate(SimulatorSpec::standard(SimulatorKind::levy), std::vector<double>{1.0, 5.0});
    // w1 = 1 kills the time-dependent product; w2 = 2.
    CHECK(s.values[0] == doctest::Approx(1.0 * (1.0 + std::pow(std::sin(4.0 * pi), 2))).epsilon(1e-12));
  }
  SUBCASE("bliznyuk second source switches on after the delay") {
    const auto spec = SimulatorSpec::standard(SimulatorKind::bliznyuk);
    CHECK(spec.grid.front() == doctest::Approx(35.3));
    CHECK(spec.grid.back() == doctest::Approx(95.0));
    const std::vector<double> x{10.0, 0.07, 1.5, 30.2, 2.0};
    const auto s = evaluate(spec, x);
    const double t = spec.grid[0];
    const double first = 10.0 / std::sqrt(0.07 * t) * std::exp(-4.0 / (4.0 * 0.07 * t));
    const double second = 10.0 / std::sqrt(0.07 * (t - 30.2)) * std::exp(-0.25 / (4.0 * 0.07 * (t - 30.2)));
    CHECK(s.values[0] == doctest::Approx(first + second));
  }
}

TEST_CASE("inputs outside the box are rejected") {
  const auto spec = SimulatorSpec::standard(SimulatorKind::easom);
  CHECK_THROWS_AS(evaluate(spec, std::vector<double>{1.2, 0.5}), std::domain_error);
  CHECK_THROWS_AS(evaluate(spec, std::vector<double>{0.5}), std::invalid_argument);
}

TEST_CASE("unit and native scales round-trip") {
  const auto spec = SimulatorSpec::standard(SimulatorKind::bliznyuk);
  const std::vector<double> unit{0.1, 0.2, 0.3, 0.4, 0.5};
  const auto native = spec.to_native(unit);
  CHECK(native[0] == doctest::Approx(7.6));
  const auto back = spec.to_unit(native);
  for (std::size_t k = 0; k < unit.size(); ++k) CHECK(back[k] == doctest::Approx(unit[k]));
}

TEST_CASE("noisy targets depend only on the seed") {
  const auto spec = SimulatorSpec::standard(SimulatorKind::easom, 1e-6);
  const std::vector<double> x0{0.8, 0.2};
  const auto a = make_target(spec, x0, 5);
  const auto b = make_target(spec, x0, 5);
  const auto c = make_target(spec, x0, 6);
  CHECK(a.series.values == b.series.values);
  CHECK(a.series.values != c.series.values);
  CHECK_THROWS_AS(evaluate(spec, x0), std::invalid_argument);
}

TEST_CASE("target csv parsing") {
  SUBCASE("round trip through the writer") {
    const auto series = evaluate(SimulatorSpec::standard(SimulatorKind::harari), std::vector<double>{0.2, 0.4, 0.6});
    std::stringstream buffer;
    write_series_csv(buffer, series);
    const auto parsed = parse_target_csv(buffer);
    CHECK(parsed.values == series.values);
    CHECK(parsed.size() == 200);
  }
  SUBCASE("byte-order mark and blank lines are accepted") {
    std::istringstream in("\xEF\xBB\xBFt,value\n0,1\n\n0.5,2\n1,3\n");
    CHECK(parse_target_csv(in).values == std::vector<double>{1, 2, 3});
  }
  SUBCASE("errors name the line") {
    std::istringstream bad_header("time,value\n0,1\n");
    CHECK_THROWS_WITH_AS(parse_target_csv(bad_header, "f.csv"), doctest::Contains("f.csv:1"), std::invalid_argument);
    std::istringstream bad_number("t,value\n0,1\n0.5,abc\n1,2\n");
    CHECK_THROWS_WITH_AS(parse_target_csv(bad_number, "f.csv"), doctest::Contains("f.csv:3"), std::invalid_argument);
    std::istringstream extra_column("t,value\n0,1,2\n");
    CHECK_THROWS_AS(parse_target_csv(extra_column), std::invalid_argument);
    std::istringstream uneven("t,value\n0,1\n0.1,1\n1,1\n");
    CHECK_THROWS_AS(parse_target_csv(uneven), std::invalid_argument);
  }
}
