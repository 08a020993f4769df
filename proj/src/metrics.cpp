#include "msce/metrics.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "msce/kernels.hpp"

namespace msce {

FitTerms fit_terms(const TimeSeries& fitted, const TimeSeries& target) {
  fitted.validate();
  target.validate();
  if (!(fitted.grid == target.grid)) throw std::invalid_argument("series are on different time grids");
  if (target.size() == 0) throw std::invalid_argument("empty series");
  FitTerms terms;
  terms.length = target.size();
  terms.ss_res = kernels::sum_squared_diff(target.values, fitted.values);
  const double mean =
      std::accumulate(target.values.begin(), target.values.end(), 0.0) / static_cast<double>(terms.length);
  for (double v : target.values) terms.ss_tot += (v - mean) * (v - mean);
  return terms;
}

double rmse(const TimeSeries& fitted, const TimeSeries& target) {
  const FitTerms terms = fit_terms(fitted, target);
  return std::sqrt(terms.ss_res / static_cast<double>(terms.length));
}

namespace {

void require_variation(const FitTerms& terms) {
  if (!(terms.ss_tot > 0.0)) throw std::domain_error("target series is constant; normalized measures undefined");
}

}  // namespace

double norm_d(const TimeSeries& fitted, const TimeSeries& target) {
  const FitTerms terms = fit_terms(fitted, target);
  require_variation(terms);
  if (terms.ss_res == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(terms.ss_res / terms.ss_tot);
}

double r_squared(const TimeSeries& fitted, const TimeSeries& target) {
  const FitTerms terms = fit_terms(fitted, target);
  require_variation(terms);
  return 1.0 - terms.ss_res / terms.ss_tot;
}

std::string GofReport::norm_d_text() const { return format_number(norm_d); }

nlohmann::json GofReport::to_json() const {
  nlohmann::json out;
  out["rmse"] = rmse;
  out["r_squared"] = r_squared;
  out["r_squared_convention"] = "fixed slope 1, intercept 0 (Nash-Sutcliffe)";
  if (std::isfinite(norm_d)) {
    out["norm_d"] = norm_d;
  } else {
    out["norm_d"] = nlohmann::json{{"sentinel", "-inf"}};
  }
  out["spread"] = spread ? nlohmann::json(*spread) : nlohmann::json(nullptr);
  out["runtime_ms"] = runtime_ms;
  out["simulator_calls"] = simulator_calls;
  return out;
}

GofReport score(const TimeSeries& fitted, const TimeSeries& target) {
  const FitTerms terms = fit_terms(fitted, target);
  require_variation(terms);
  GofReport report;
  report.rmse = std::sqrt(terms.ss_res / static_cast<double>(terms.length));
  report.r_squared = 1.0 - terms.ss_res / terms.ss_tot;
  report.norm_d = terms.ss_res == 0.0 ? -std::numeric_limits<double>::infinity()
                                      : std::log(terms.ss_res / terms.ss_tot);
  return report;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, value, std::chars_format::general, 17);
  return std::string(buffer, result.ptr);
}

}  // namespace msce
