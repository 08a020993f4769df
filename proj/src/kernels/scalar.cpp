#include <cmath>
#include <cstddef>

#include "msce/kernels.hpp"

namespace msce::kernels::scalar {

double dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

double sum_squared_diff(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    sum += diff * diff;
  }
  return sum;
}

void add_power_distance(std::span<const double> values, double center, double weight,
                        double power, std::span<double> acc) {
  if (power == 2.0) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double diff = values[i] - center;
      acc[i] += weight * (diff * diff);
    }
    return;
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double diff = std::fabs(values[i] - center);
    acc[i] += weight * std::pow(diff, power);
  }
}

void exp_negate(std::span<double> acc) {
  for (double& value : acc) value = std::exp(-value);
}

}  // namespace msce::kernels::scalar
