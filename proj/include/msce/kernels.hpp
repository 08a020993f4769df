#pragma once

// Data-parallel inner loops shared by the surrogate, the spline search and the
// scoring code. Every kernel has a scalar reference implementation; wider
// variants are selected once at runtime from the host CPU's capabilities and
// are tested for equivalence against the reference.

#include <span>
#include <string_view>

namespace msce::kernels {

enum class Isa { scalar, avx2 };

/// ISA used by the dispatched entry points. Resolved on first use from the
/// CPU feature flags; `INVERSE_TS_SIMD=scalar` in the environment forces the
/// reference path.
Isa active_isa();
std::string_view isa_name(Isa isa);

double dot(std::span<const double> a, std::span<const double> b);
double sum_squared_diff(std::span<const double> a, std::span<const double> b);

/// acc[i] += weight * |values[i] - center|^power, for 0 < power <= 2.
void add_power_distance(std::span<const double> values, double center, double weight,
                        double power, std::span<double> acc);

/// acc[i] = exp(-acc[i]).
void exp_negate(std::span<double> acc);

namespace scalar {
double dot(std::span<const double> a, std::span<const double> b);
double sum_squared_diff(std::span<const double> a, std::span<const double> b);
void add_power_distance(std::span<const double> values, double center, double weight,
                        double power, std::span<double> acc);
void exp_negate(std::span<double> acc);
}  // namespace scalar

#if defined(MSCE_HAVE_AVX2_KERNELS)
namespace avx2 {
/// True when the running CPU supports AVX2 and FMA.
bool supported();
double dot(std::span<const double> a, std::span<const double> b);
double sum_squared_diff(std::span<const double> a, std::span<const double> b);
void add_power_distance(std::span<const double> values, double center, double weight,
                        double power, std::span<double> acc);
void exp_negate(std::span<double> acc);
}  // namespace avx2
#endif

}  // namespace msce::kernels
