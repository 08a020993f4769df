#include <cstdlib>
#include <string_view>

#include "msce/kernels.hpp"

namespace msce::kernels {
namespace {

struct Table {
  Isa isa;
  double (*dot)(std::span<const double>, std::span<const double>);
  double (*sum_squared_diff)(std::span<const double>, std::span<const double>);
  void (*add_power_distance)(std::span<const double>, double, double, double, std::span<double>);
  void (*exp_negate)(std::span<double>);
};

Table resolve() {
  const Table reference{Isa::scalar, &scalar::dot, &scalar::sum_squared_diff,
                        &scalar::add_power_distance, &scalar::exp_negate};
  if (const char* forced = std::getenv("INVERSE_TS_SIMD");
      forced != nullptr && std::string_view(forced) == "scalar") {
    return reference;
  }
#if defined(MSCE_HAVE_AVX2_KERNELS)
  if (avx2::supported()) {
    return Table{Isa::avx2, &avx2::dot, &avx2::sum_squared_diff, &avx2::add_power_distance,
                 &avx2::exp_negate};
  }
#endif
  return reference;
}

const Table& table() {
  static const Table resolved = resolve();
  return resolved;
}

}  // namespace

Isa active_isa() { return table().isa; }

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::avx2:
      return "avx2";
    case Isa::scalar:
      break;
  }
  return "scalar";
}

double dot(std::span<const double> a, std::span<const double> b) { return table().dot(a, b); }

double sum_squared_diff(std::span<const double> a, std::span<const double> b) {
  return table().sum_squared_diff(a, b);
}

void add_power_distance(std::span<const double> values, double center, double weight,
                        double power, std::span<double> acc) {
  table().add_power_distance(values, center, weight, power, acc);
}

void exp_negate(std::span<double> acc) { table().exp_negate(acc); }

}  // namespace msce::kernels
