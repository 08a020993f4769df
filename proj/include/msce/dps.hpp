#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "msce/simulators.hpp"

namespace msce {

// Discretization-point sets are knot positions of a cubic regression spline
// fitted to the target series. Positions are 1-based grid indices throughout.

/// Least-squares cubic spline fit: intercept plus the B-spline basis with the
/// first function dropped (the `lm(y ~ bs(t, knots))` column space), boundary
/// knots at the grid endpoints.
struct SplineFit {
  std::vector<std::size_t> knots;
  Eigen::VectorXd coefficients;
  std::vector<double> fitted;
  /// SSE / L.
  double mse = 0.0;
  std::size_t rank = 0;
  /// Set when pivoted QR dropped collinear columns (clustered or boundary knots).
  bool rank_deficient = false;
};

/// Reusable fitter for one series; counts every fit it performs.
class SplineFitter {
 public:
  explicit SplineFitter(const TimeSeries& series);

  SplineFit fit(std::span<const std::size_t> knots) const;
  double mse(std::span<const std::size_t> knots) const { return fit(knots).mse; }

  std::size_t length() const { return t_.size(); }
  std::size_t fit_count() const { return fit_count_; }

 private:
  std::vector<double> t_;
  Eigen::VectorXd y_;
  mutable std::size_t fit_count_ = 0;
};

SplineFit spline_fit(const TimeSeries& series, std::span<const std::size_t> knots);

/// Cubic B-spline design matrix (intercept + bs() columns) on the grid `t`.
Eigen::MatrixXd spline_design_matrix(std::span<const double> t, std::span<const double> interior_knots);

enum class KnotSearchMode { sequential, simultaneous };
std::string_view to_string(KnotSearchMode mode);

enum class ElbowRule {
  /// Smallest k >= 2 where the log-MSE reduction of knot k is smaller than
  /// that of knot k-1 (second difference of log MSE over k-2, k-1, k is > 0).
  log_gain,
  /// Smallest k >= 1 with MSE(k+1) - 2 MSE(k) + MSE(k-1) > 0.
  second_difference,
};
std::string_view to_string(ElbowRule rule);
ElbowRule elbow_rule_from_string(std::string_view name);

struct ElbowResult {
  std::size_t k = 1;
  /// No positive second difference: k is the argmin of the curve over k >= 1.
  bool fallback = false;
};

/// `mse_curve[k]` is the MSE with k knots; mse_curve[0] is the no-knot fit.
ElbowResult elbow(std::span<const double> mse_curve, ElbowRule rule = ElbowRule::log_gain);

struct DpsResult {
  KnotSearchMode mode = KnotSearchMode::sequential;
  ElbowRule rule = ElbowRule::log_gain;
  /// Sequential: knots in selection order. Simultaneous: the best subset.
  std::vector<std::size_t> knots;
  /// Sequential: MSE after 0..kmax knots. Simultaneous: {no-knot, best subset}.
  std::vector<double> mse_curve;
  std::size_t selected_k = 0;
  bool elbow_fallback = false;
  /// Fits performed by the planned scan (equals search_cost()).
  std::size_t fit_count = 0;
  /// Fits outside the planned scan (no-knot baseline, injected candidates).
  std::size_t extra_fits = 0;
  double wall_ms = 0.0;

  /// The first selected_k knots.
  std::vector<std::size_t> dps() const;
  nlohmann::json to_json() const;
};

/// Greedy forward selection: each step scans every grid position not yet
/// chosen and keeps the one with the smallest MSE (smallest index on ties).
DpsResult sequential_knot_search(const TimeSeries& series, std::size_t kmax,
                                 ElbowRule rule = ElbowRule::log_gain);

/// Best of `budget` random k-subsets of interior positions, plus the greedy
/// answer as one extra candidate. With `exhaustive`, enumerates every
/// k-subset of all positions instead (only sensible for k = 1 or tiny L).
DpsResult simultaneous_knot_search(const TimeSeries& series, std::size_t k, std::size_t budget,
                                   std::uint64_t seed, bool exhaustive = false);

/// Planned fit count: sequential sum_{j=1..k} (L - (j-1)); simultaneous
/// (random-subset budget L*j for every size j = 1..k) sum_{j=1..k} L*j.
std::size_t search_cost(std::size_t length, std::size_t k, KnotSearchMode mode);

}  // namespace msce
