#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace msce {

/// Independent random streams derived from one master seed. Adding a consumer
/// of one stream never shifts the draws seen by another.
enum class Stream : std::uint64_t {
  design = 1,
  target_noise = 2,
  candidate = 3,
  kmeans = 4,
  extraction = 5,
  simulator_noise = 6,
  knot_search = 7,
  gp_starts = 8,
};

/// Portable RNG: std::mt19937_64 (fully specified by the standard) with
/// hand-written uniform/normal/integer transforms so that draws do not depend
/// on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Seeds a stream as splitmix64(master ^ golden * stream).
  static Rng for_stream(std::uint64_t master_seed, Stream stream);

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal();

  /// Uniform integer in [0, n), unbiased (rejection on the top range).
  std::size_t below(std::size_t n);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace msce
