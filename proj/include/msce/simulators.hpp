#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "msce/rng.hpp"

namespace msce {

/// Strictly increasing, equidistant time points.
class TimeGrid {
 public:
  TimeGrid() = default;

  static TimeGrid equidistant(double start, double stop, std::size_t length);

  /// Validates monotonicity and equal spacing; `spacing_tolerance` is relative
  /// to the mean spacing.
  static TimeGrid from_values(std::vector<double> values, double spacing_tolerance = 1e-12);

  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double front() const { return values_.front(); }
  double back() const { return values_.back(); }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  explicit TimeGrid(std::vector<double> values) : values_(std::move(values)) {}
  std::vector<double> values_;
};

struct TimeSeries {
  TimeGrid grid;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  /// Throws std::invalid_argument on length mismatch or non-finite values.
  void validate() const;
};

enum class SimulatorKind { easom, levy, harari, bliznyuk, external };

std::string_view to_string(SimulatorKind kind);
SimulatorKind simulator_kind_from_string(std::string_view name);

struct Interval {
  double lower = 0.0;
  double upper = 1.0;
};

/// A time-series-valued test simulator on its native input box. Solvers work
/// on [0,1]^d and map through to_native().
struct SimulatorSpec {
  SimulatorKind kind = SimulatorKind::easom;
  std::size_t dim = 2;
  std::vector<Interval> box;
  TimeGrid grid;
  double noise_sd = 0.0;

  /// Standard configuration: 200-point grid on [0,1] (Easom, Levy, Harari) or
  /// [35.3, 95] (Bliznyuk) and the published input box.
  static SimulatorSpec standard(SimulatorKind kind, double noise_sd = 0.0);

  /// Spec for an externally supplied target: no formula, only a grid and a box.
  static SimulatorSpec external(TimeGrid grid, std::vector<Interval> box);

  void validate() const;

  std::vector<double> to_native(std::span<const double> unit) const;
  std::vector<double> to_unit(std::span<const double> native) const;
};

/// Evaluates the named formula at a native-scale input. Adds i.i.d. N(0,
/// noise_sd^2) noise when noise_sd > 0, which requires `noise`.
/// Throws std::domain_error for inputs outside the box.
TimeSeries evaluate(const SimulatorSpec& spec, std::span<const double> x, Rng* noise = nullptr);

struct Target {
  TimeSeries series;
  /// Generating input and noise seed; kept for scoring, never passed to solvers.
  std::vector<double> x0;
  std::uint64_t seed = 0;
};

Target make_target(const SimulatorSpec& spec, std::span<const double> x0, std::uint64_t seed);

/// Reads a `t,value` CSV (header required).
TimeSeries load_external_target(const std::filesystem::path& path);
TimeSeries parse_target_csv(std::istream& in, const std::string& source_name = "<stream>");
void write_series_csv(std::ostream& out, const TimeSeries& series);

}  // namespace msce
