#include "msce/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace msce {
namespace {

// Phi(hi) - Phi(lo) for lo <= hi, evaluated on the tail that avoids cancellation.
double normal_mass(double lo, double hi) {
  if (lo >= 0.0) return 0.5 * (std::erfc(lo / std::numbers::sqrt2) - std::erfc(hi / std::numbers::sqrt2));
  if (hi <= 0.0) return 0.5 * (std::erfc(-hi / std::numbers::sqrt2) - std::erfc(-lo / std::numbers::sqrt2));
  return normal_cdf(hi) - normal_cdf(lo);
}

}  // namespace

void AcquisitionConfig::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be > 0");
  if (!(cutoff > 0.0)) throw std::invalid_argument("implausibility cutoff must be > 0");
}

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double contour_ei(double mean, double sd, double level, double alpha) {
  if (!(sd > 0.0)) return 0.0;
  // Standardized offset of the prediction from the contour.
  const double delta = (mean - level) / sd;
  const double u1 = -delta - alpha;
  const double u2 = -delta + alpha;
  const double mass = normal_mass(u1, u2);
  const double pdf1 = normal_pdf(u1);
  const double pdf2 = normal_pdf(u2);
  const double scaled = (alpha * alpha - delta * delta) * mass + 2.0 * delta * (pdf2 - pdf1) +
                        (u2 * pdf2 - u1 * pdf1) - mass;
  return std::max(sd * sd * scaled, 0.0);
}

double global_min_ei(double mean, double sd, double best) {
  if (!(sd > 0.0)) return std::max(best - mean, 0.0);
  const double z = (best - mean) / sd;
  return std::max((best - mean) * normal_cdf(z) + sd * normal_pdf(z), 0.0);
}

double implausibility(std::span<const double> predicted, std::span<const double> sd,
                      std::span<const double> target) {
  if (predicted.size() != sd.size() || predicted.size() != target.size() || predicted.empty()) {
    throw std::invalid_argument("implausibility: mismatched or empty inputs");
  }
  double worst = 0.0;
  for (std::size_t j = 0; j < predicted.size(); ++j) {
    const double gap = std::fabs(predicted[j] - target[j]);
    double term = 0.0;
    if (sd[j] > 0.0) {
      term = gap / sd[j];
    } else if (gap > 0.0) {
      term = std::numeric_limits<double>::infinity();
    }
    worst = std::max(worst, term);
  }
  return worst;
}

CandidateChoice argmax_on_candidates(std::span<const double> values, const Eigen::MatrixXd& candidates,
                                     const Eigen::MatrixXd& training, double exclusion) {
  if (candidates.rows() == 0) throw std::invalid_argument("argmax_on_candidates: empty candidate set");
  if (values.size() != static_cast<std::size_t>(candidates.rows())) {
    throw std::invalid_argument("argmax_on_candidates: one criterion value per candidate required");
  }
  bool found = false;
  CandidateChoice best;
  for (Eigen::Index i = 0; i < candidates.rows(); ++i) {
    const double value = values[static_cast<std::size_t>(i)];
    if (found && !(value > best.value)) continue;
    bool excluded = false;
    for (Eigen::Index t = 0; t < training.rows() && !excluded; ++t) {
      excluded = (candidates.row(i) - training.row(t)).cwiseAbs().maxCoeff() <= exclusion;
    }
    if (excluded) continue;
    if (!found || value > best.value) {
      best = CandidateChoice{static_cast<std::size_t>(i), value};
      found = true;
    }
  }
  if (!found) {
    throw std::runtime_error("every candidate lies within the exclusion radius of a training point; "
                             "use a larger candidate set");
  }
  return best;
}

std::vector<double> contour_ei_on(const GpModel& model, const Eigen::MatrixXd& candidates,
                                  double level, double alpha) {
  const auto m = static_cast<std::size_t>(candidates.rows());
  std::vector<double> mean(m), variance(m), out(m);
  model.predict(candidates, mean, variance);
  for (std::size_t i = 0; i < m; ++i) out[i] = contour_ei(mean[i], std::sqrt(variance[i]), level, alpha);
  return out;
}

std::vector<double> global_min_ei_on(const GpModel& model, const Eigen::MatrixXd& candidates,
                                     double best) {
  const auto m = static_cast<std::size_t>(candidates.rows());
  std::vector<double> mean(m), variance(m), out(m);
  model.predict(candidates, mean, variance);
  for (std::size_t i = 0; i < m; ++i) out[i] = global_min_ei(mean[i], std::sqrt(variance[i]), best);
  return out;
}

}  // namespace msce
