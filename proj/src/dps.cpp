#include "msce/dps.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "msce/kernels.hpp"
#include "msce/rng.hpp"

namespace msce {
namespace {

constexpr int kDegree = 3;

// Index of the knot span holding x: U[i] <= x < U[i+1], restricted to
// non-empty spans; x at the right boundary uses the last non-empty span.
std::size_t find_span(const std::vector<double>& u, std::size_t n_basis, double x) {
  std::size_t hi = n_basis - 1;
  while (hi > static_cast<std::size_t>(kDegree) && !(u[hi] < u[hi + 1])) --hi;
  if (x >= u[hi + 1]) return hi;
  const auto it = std::upper_bound(u.begin(), u.end(), x);
  std::size_t span = static_cast<std::size_t>(it - u.begin()) - 1;
  span = std::clamp(span, static_cast<std::size_t>(kDegree), hi);
  while (span > static_cast<std::size_t>(kDegree) && !(u[span] < u[span + 1])) --span;
  return span;
}

// Non-zero basis values N_{span-3..span}(x) (Cox-de Boor, triangular scheme).
void basis_functions(const std::vector<double>& u, std::size_t span, double x, double* out) {
  double left[kDegree + 1];
  double right[kDegree + 1];
  out[0] = 1.0;
  for (int j = 1; j <= kDegree; ++j) {
    left[j] = x - u[span + 1 - static_cast<std::size_t>(j)];
    right[j] = u[span + static_cast<std::size_t>(j)] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double denom = right[r + 1] + left[j - r];
      const double temp = denom != 0.0 ? out[r] / denom : 0.0;
      out[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    out[j] = saved;
  }
}

void check_knots(std::span<const std::size_t> knots, std::size_t length) {
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (knots[i] < 1 || knots[i] > length) {
      throw std::invalid_argument("knot position " + std::to_string(knots[i]) + " outside 1.." +
                                  std::to_string(length));
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (knots[i] == knots[j]) {
        throw std::invalid_argument("duplicate knot position " + std::to_string(knots[i]));
      }
    }
  }
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace

Eigen::MatrixXd spline_design_matrix(std::span<const double> t, std::span<const double> interior_knots) {
  const double a = t.front();
  const double b = t.back();
  std::vector<double> u(kDegree + 1, a);
  std::vector<double> sorted(interior_knots.begin(), interior_knots.end());
  std::sort(sorted.begin(), sorted.end());
  u.insert(u.end(), sorted.begin(), sorted.end());
  u.insert(u.end(), kDegree + 1, b);
  const std::size_t n_basis = u.size() - kDegree - 1;

  const auto rows = static_cast<Eigen::Index>(t.size());
  // Intercept + basis functions 2..n_basis.
  Eigen::MatrixXd design = Eigen::MatrixXd::Zero(rows, static_cast<Eigen::Index>(n_basis));
  double values[kDegree + 1];
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double x = t[static_cast<std::size_t>(i)];
    const std::size_t span = find_span(u, n_basis, x);
    basis_functions(u, span, x, values);
    design(i, 0) = 1.0;
    for (int r = 0; r <= kDegree; ++r) {
      const std::size_t basis_index = span - kDegree + static_cast<std::size_t>(r);
      if (basis_index == 0) continue;
      design(i, static_cast<Eigen::Index>(basis_index)) = values[r];
    }
  }
  return design;
}

SplineFitter::SplineFitter(const TimeSeries& series)
    : t_(series.grid.values().begin(), series.grid.values().end()),
      y_(Eigen::Map<const Eigen::VectorXd>(series.values.data(),
                                           static_cast<Eigen::Index>(series.values.size()))) {
  series.validate();
}

SplineFit SplineFitter::fit(std::span<const std::size_t> knots) const {
  check_knots(knots, t_.size());
  ++fit_count_;
  std::vector<double> knot_values(knots.size());
  for (std::size_t i = 0; i < knots.size(); ++i) knot_values[i] = t_[knots[i] - 1];

  const Eigen::MatrixXd design = spline_design_matrix(t_, knot_values);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);

  SplineFit result;
  result.knots.assign(knots.begin(), knots.end());
  result.coefficients = qr.solve(y_);
  result.rank = static_cast<std::size_t>(qr.rank());
  result.rank_deficient = result.rank < static_cast<std::size_t>(design.cols());
  const Eigen::VectorXd fitted = design * result.coefficients;
  result.fitted.assign(fitted.data(), fitted.data() + fitted.size());
  const double sse = kernels::sum_squared_diff(result.fitted, std::span<const double>(y_.data(), t_.size()));
  result.mse = sse / static_cast<double>(t_.size());
  return result;
}

SplineFit spline_fit(const TimeSeries& series, std::span<const std::size_t> knots) {
  return SplineFitter(series).fit(knots);
}

std::string_view to_string(KnotSearchMode mode) {
  return mode == KnotSearchMode::sequential ? "sequential" : "simultaneous";
}

std::string_view to_string(ElbowRule rule) {
  return rule == ElbowRule::log_gain ? "log_gain" : "second_difference";
}

ElbowRule elbow_rule_from_string(std::string_view name) {
  if (name == "log_gain") return ElbowRule::log_gain;
  if (name == "second_difference") return ElbowRule::second_difference;
  throw std::invalid_argument("unknown elbow rule '" + std::string(name) + "'");
}

ElbowResult elbow(std::span<const double> mse_curve, ElbowRule rule) {
  if (mse_curve.size() < 3) throw std::invalid_argument("elbow needs at least 3 curve points");
  const std::size_t kmax = mse_curve.size() - 1;
  if (rule == ElbowRule::second_difference) {
    for (std::size_t k = 1; k < kmax; ++k) {
      if (mse_curve[k + 1] - 2.0 * mse_curve[k] + mse_curve[k - 1] > 0.0) return {k, false};
    }
  } else {
    std::vector<double> logs(mse_curve.size());
    for (std::size_t k = 0; k <= kmax; ++k) {
      logs[k] = std::log(std::max(mse_curve[k], std::numeric_limits<double>::min()));
    }
    for (std::size_t k = 2; k <= kmax; ++k) {
      if (logs[k] - 2.0 * logs[k - 1] + logs[k - 2] > 0.0) return {k, false};
    }
  }
  std::size_t best = 1;
  for (std::size_t k = 2; k <= kmax; ++k) {
    if (mse_curve[k] < mse_curve[best]) best = k;
  }
  return {best, true};
}

std::vector<std::size_t> DpsResult::dps() const {
  const std::size_t k = std::min(selected_k, knots.size());
  return {knots.begin(), knots.begin() + static_cast<std::ptrdiff_t>(k)};
}

nlohmann::json DpsResult::to_json() const {
  return nlohmann::json{{"mode", to_string(mode)},
                        {"elbow_rule", to_string(rule)},
                        {"knots", knots},
                        {"mse_curve", mse_curve},
                        {"selected_k", selected_k},
                        {"dps", dps()},
                        {"elbow_fallback", elbow_fallback},
                        {"fit_count", fit_count},
                        {"extra_fits", extra_fits},
                        {"wall_ms", wall_ms}};
}

DpsResult sequential_knot_search(const TimeSeries& series, std::size_t kmax, ElbowRule rule) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t length = series.size();
  if (kmax < 1 || 2 * kmax >= length) {
    throw std::invalid_argument("sequential knot search needs 1 <= kmax < L/2");
  }
  SplineFitter fitter(series);
  DpsResult result;
  result.mode = KnotSearchMode::sequential;
  result.rule = rule;
  result.mse_curve.push_back(fitter.mse({}));
  result.extra_fits = 1;

  std::vector<std::size_t> chosen;
  std::vector<bool> used(length + 1, false);
  const std::size_t before_scan = fitter.fit_count();
  for (std::size_t step = 0; step < kmax; ++step) {
    double best_mse = std::numeric_limits<double>::infinity();
    std::size_t best_position = 0;
    chosen.push_back(0);
    for (std::size_t position = 1; position <= length; ++position) {
      if (used[position]) continue;
      chosen.back() = position;
      const double mse = fitter.mse(chosen);
      if (mse < best_mse) {
        best_mse = mse;
        best_position = position;
      }
    }
    chosen.back() = best_position;
    used[best_position] = true;
    result.mse_curve.push_back(best_mse);
  }
  result.fit_count = fitter.fit_count() - before_scan;
  result.knots = chosen;

  if (result.mse_curve.size() >= 3) {
    const ElbowResult cut = elbow(result.mse_curve, rule);
    result.selected_k = cut.k;
    result.elbow_fallback = cut.fallback;
  } else {
    result.selected_k = kmax;
  }
  result.wall_ms = elapsed_ms(start);
  return result;
}

DpsResult simultaneous_knot_search(const TimeSeries& series, std::size_t k, std::size_t budget,
                                   std::uint64_t seed, bool exhaustive) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t length = series.size();
  if (budget < 1) throw std::invalid_argument("simultaneous knot search needs budget >= 1");
  if (k < 1 || k + 2 > length) throw std::invalid_argument("simultaneous knot search needs 1 <= k <= L-2");

  SplineFitter fitter(series);
  DpsResult result;
  result.mode = KnotSearchMode::simultaneous;
  result.selected_k = k;
  const double baseline = fitter.mse({});

  std::vector<std::size_t> best;
  double best_mse = std::numeric_limits<double>::infinity();
  auto consider = [&](const std::vector<std::size_t>& subset) {
    const double mse = fitter.mse(subset);
    if (mse < best_mse) {
      best_mse = mse;
      best = subset;
    }
  };

  const std::size_t before_scan = fitter.fit_count();
  if (exhaustive) {
    std::vector<std::size_t> subset(k);
    std::iota(subset.begin(), subset.end(), std::size_t{1});
    while (true) {
      consider(subset);
      std::size_t i = k;
      while (i > 0 && subset[i - 1] == length - k + i) --i;
      if (i == 0) break;
      ++subset[i - 1];
      for (std::size_t j = i; j < k; ++j) subset[j] = subset[j - 1] + 1;
    }
  } else {
    Rng rng = Rng::for_stream(seed, Stream::knot_search);
    std::vector<std::size_t> interior(length - 2);
    std::iota(interior.begin(), interior.end(), std::size_t{2});
    std::vector<std::size_t> subset(k);
    for (std::size_t draw = 0; draw < budget; ++draw) {
      for (std::size_t i = 0; i < k; ++i) {
        std::swap(interior[i], interior[i + rng.below(interior.size() - i)]);
        subset[i] = interior[i];
      }
      consider(subset);
    }
  }
  result.fit_count = fitter.fit_count() - before_scan;

  if (2 * k < length) {
    const DpsResult greedy = sequential_knot_search(series, k, ElbowRule::log_gain);
    consider(greedy.knots);
    result.extra_fits = 1 + greedy.fit_count + greedy.extra_fits;
  }
  result.extra_fits += 1;
  result.knots = best;
  result.mse_curve = {baseline, best_mse};
  result.wall_ms = elapsed_ms(start);
  return result;
}

std::size_t search_cost(std::size_t length, std::size_t k, KnotSearchMode mode) {
  if (k >= length) throw std::invalid_argument("search_cost needs k < L");
  std::size_t total = 0;
  for (std::size_t j = 1; j <= k; ++j) {
    total += mode == KnotSearchMode::sequential ? length - (j - 1) : length * j;
  }
  return total;
}

}  // namespace msce
