#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

namespace msce::detail {

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  std::size_t evaluations = 0;
};

/// Box-constrained Nelder-Mead: trial points are projected onto the box.
/// Stops after `max_evaluations` or when the simplex values agree to `ftol`
/// and its vertices to `xtol`.
template <class Objective>
NelderMeadResult nelder_mead(Objective&& f, std::vector<double> start, std::span<const double> lower,
                             std::span<const double> upper, double initial_step,
                             std::size_t max_evaluations, double ftol = 1e-9, double xtol = 1e-7) {
  const std::size_t n = start.size();
  auto project = [&](std::vector<double>& p) {
    for (std::size_t i = 0; i < n; ++i) p[i] = std::clamp(p[i], lower[i], upper[i]);
  };

  std::vector<std::vector<double>> simplex(n + 1, start);
  std::vector<double> values(n + 1);
  std::size_t evaluations = 0;
  auto eval = [&](const std::vector<double>& p) {
    ++evaluations;
    const double v = f(std::span<const double>(p));
    return std::isfinite(v) ? v : HUGE_VAL;
  };

  project(simplex[0]);
  for (std::size_t i = 0; i < n; ++i) {
    auto& vertex = simplex[i + 1];
    const double room_up = upper[i] - vertex[i];
    vertex[i] += room_up >= initial_step ? initial_step : -initial_step;
    project(vertex);
  }
  for (std::size_t i = 0; i <= n; ++i) values[i] = eval(simplex[i]);

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), trial(n), second(n);
  while (evaluations < max_evaluations) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t next_worst = order[n - 1];

    double spread = 0.0;
    for (std::size_t v = 0; v <= n; ++v) {
      for (std::size_t i = 0; i < n; ++i) {
        spread = std::max(spread, std::fabs(simplex[v][i] - simplex[best][i]));
      }
    }
    if (std::fabs(values[worst] - values[best]) <= ftol * (std::fabs(values[best]) + 1e-12) &&
        spread <= xtol) {
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t v = 0; v <= n; ++v) {
      if (v == worst) continue;
      for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[v][i] / static_cast<double>(n);
    }
    for (std::size_t i = 0; i < n; ++i) trial[i] = centroid[i] + (centroid[i] - simplex[worst][i]);
    project(trial);
    const double reflected = eval(trial);

    if (reflected < values[best]) {
      for (std::size_t i = 0; i < n; ++i) second[i] = centroid[i] + 2.0 * (trial[i] - centroid[i]);
      project(second);
      const double expanded = eval(second);
      if (expanded < reflected) {
        simplex[worst] = second;
        values[worst] = expanded;
      } else {
        simplex[worst] = trial;
        values[worst] = reflected;
      }
      continue;
    }
    if (reflected < values[next_worst]) {
      simplex[worst] = trial;
      values[worst] = reflected;
      continue;
    }
    const bool outside = reflected < values[worst];
    for (std::size_t i = 0; i < n; ++i) {
      const double toward = outside ? trial[i] : simplex[worst][i];
      second[i] = centroid[i] + 0.5 * (toward - centroid[i]);
    }
    project(second);
    const double contracted = eval(second);
    if (contracted < std::min(reflected, values[worst])) {
      simplex[worst] = second;
      values[worst] = contracted;
      continue;
    }
    for (std::size_t v = 0; v <= n; ++v) {
      if (v == best) continue;
      for (std::size_t i = 0; i < n; ++i) {
        simplex[v][i] = simplex[best][i] + 0.5 * (simplex[v][i] - simplex[best][i]);
      }
      values[v] = eval(simplex[v]);
    }
  }

  const auto best = static_cast<std::size_t>(
      std::min_element(values.begin(), values.end()) - values.begin());
  return NelderMeadResult{simplex[best], values[best], evaluations};
}

}  // namespace msce::detail
