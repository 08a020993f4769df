#pragma once

#include <json.hpp>

#include <cstddef>
#include <optional>
#include <string>

#include "msce/simulators.hpp"

namespace msce {

/// Sum-of-squares terms shared by every goodness-of-fit measure.
struct FitTerms {
  double ss_res = 0.0;  ///< sum (g0 - g_hat)^2
  double ss_tot = 0.0;  ///< sum (g0 - mean(g0))^2
  std::size_t length = 0;
};

/// Throws std::invalid_argument when the two series live on different grids.
FitTerms fit_terms(const TimeSeries& fitted, const TimeSeries& target);

double rmse(const TimeSeries& fitted, const TimeSeries& target);

/// log(ss_res / ss_tot); -inf for a perfect fit. Throws std::domain_error for
/// a constant target.
double norm_d(const TimeSeries& fitted, const TimeSeries& target);

/// 1 - ss_res / ss_tot: R^2 of g0 = g_hat + error with slope 1 and intercept 0,
/// i.e. the Nash-Sutcliffe efficiency. Equals 1 - exp(norm_d).
double r_squared(const TimeSeries& fitted, const TimeSeries& target);

struct GofReport {
  double rmse = 0.0;
  double r_squared = 0.0;
  /// -inf for a perfect fit.
  double norm_d = 0.0;
  std::optional<double> spread;
  double runtime_ms = 0.0;
  std::size_t simulator_calls = 0;

  /// norm_d rendered for reports: "-inf" for a perfect fit.
  std::string norm_d_text() const;
  nlohmann::json to_json() const;
};

GofReport score(const TimeSeries& fitted, const TimeSeries& target);

/// Formats a double with 17 significant digits; non-finite values as "inf"/"-inf"/"nan".
std::string format_number(double value);

}  // namespace msce
