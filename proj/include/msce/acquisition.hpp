#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "msce/gp.hpp"

namespace msce {

enum class CriterionKind { contour, global_min, implausibility };

struct AcquisitionConfig {
  /// Confidence multiplier: epsilon(x) = alpha * s(x). 0.67 ~ 50% under normality.
  double alpha = 0.67;
  CriterionKind criterion = CriterionKind::contour;
  /// History-matching cutoff on the maximum implausibility.
  double cutoff = 3.0;

  void validate() const;
};

double normal_pdf(double z);
double normal_cdf(double z);

/// Expected improvement for estimating the contour y(x) = level, under
/// y(x) ~ N(mean, sd^2), with improvement
///   I = eps^2 - min((y - level)^2, eps^2),  eps = alpha * sd.
/// Zero when sd == 0; never negative.
double contour_ei(double mean, double sd, double level, double alpha);

/// Expected improvement below the incumbent minimum `best`:
///   (best - mean) Phi(z) + sd phi(z),  z = (best - mean) / sd.
double global_min_ei(double mean, double sd, double best);

/// max_j |predicted_j - target_j| / sd_j. A zero sd yields +inf unless the
/// prediction matches exactly, in which case that term is 0.
double implausibility(std::span<const double> predicted, std::span<const double> sd,
                      std::span<const double> target);

struct CandidateChoice {
  std::size_t row = 0;
  double value = 0.0;
};

/// Row of the largest criterion value among candidates farther than
/// `exclusion` (sup-norm) from every training point; lowest row wins ties.
/// Throws std::runtime_error when every candidate is excluded.
CandidateChoice argmax_on_candidates(std::span<const double> values, const Eigen::MatrixXd& candidates,
                                     const Eigen::MatrixXd& training, double exclusion = 1e-9);

/// Contour EI of a fitted surrogate at every candidate row.
std::vector<double> contour_ei_on(const GpModel& model, const Eigen::MatrixXd& candidates,
                                  double level, double alpha);

/// Global-minimum EI of a fitted surrogate at every candidate row.
std::vector<double> global_min_ei_on(const GpModel& model, const Eigen::MatrixXd& candidates,
                                     double best);

}  // namespace msce
