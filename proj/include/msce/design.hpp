#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string_view>

namespace msce {

enum class LhdCriterion { random, maximin, maxpro };

std::string_view to_string(LhdCriterion criterion);
LhdCriterion lhd_criterion_from_string(std::string_view name);

/// Latin hypercube design on [0,1]^d, one point per row. Every column holds
/// exactly one point in each of the n strata [i/n, (i+1)/n).
struct Design {
  Eigen::MatrixXd points;
  LhdCriterion criterion = LhdCriterion::random;
  std::uint64_t seed = 0;
  std::size_t effort = 0;
  /// Criterion value of the random start and of the returned design
  /// (min pairwise distance for maximin, projection sum for maxpro).
  double initial_score = 0.0;
  double final_score = 0.0;
  std::size_t accepted_moves = 0;

  std::size_t rows() const { return static_cast<std::size_t>(points.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(points.cols()); }
};

/// Random-start LHD, optionally improved by `effort` random within-column
/// swaps that are kept only when they improve the criterion. Points sit at
/// stratum centers unless `jitter` is set.
Design lhd(std::size_t n, std::size_t d, std::uint64_t seed, LhdCriterion criterion,
           std::size_t effort = 0, bool jitter = false);

/// Minimum pairwise Euclidean distance.
double maximin_distance(const Eigen::MatrixXd& points);

/// sum_{i<j} 1 / prod_r (x_ir - x_jr)^2; +inf when two points share a
/// coordinate in some column.
double maxpro_sum(const Eigen::MatrixXd& points);

/// CSV with header x1..xd.
void write_design_csv(std::ostream& out, const Eigen::MatrixXd& points);

}  // namespace msce
