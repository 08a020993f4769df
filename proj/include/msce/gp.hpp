#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <json.hpp>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace msce {

enum class NuggetPolicy {
  /// Use `GpConfig::nugget` exactly (0 allowed); fail if the matrix is not PD.
  fixed,
  /// Start at `GpConfig::nugget`, multiply by 10 on Cholesky failure up to
  /// `GpConfig::max_nugget`.
  adaptive,
};

struct GpConfig {
  /// Power-exponential smoothness p_k, shared by every input unless
  /// `smoothness_per_dim` is non-empty.
  double smoothness = 1.95;
  std::vector<double> smoothness_per_dim;

  NuggetPolicy nugget_policy = NuggetPolicy::adaptive;
  /// Added to the diagonal of the correlation matrix.
  double nugget = 1e-8;
  double max_nugget = 1e-4;

  /// theta search box; the likelihood is optimized over log(theta).
  double theta_lower = 1e-2;
  double theta_upper = 1e2;
  std::size_t multistarts = 5;
  /// Optional extra start (for example the previous fit's theta), clamped to the box.
  std::vector<double> initial_theta;
  std::size_t max_evaluations = 250;
  std::uint64_t seed = 0;

  std::vector<double> smoothness_for(std::size_t dim) const;
  void validate(std::size_t dim) const;
};

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
  double sd() const { return std::sqrt(variance); }
};

struct LikelihoodStart {
  std::vector<double> theta;
  double log_likelihood = 0.0;
};

/// Ordinary-kriging surrogate with power-exponential correlation
///   R(x, x') = prod_k exp(-theta_k |x_k - x'_k|^p_k),
/// constant mean and variance profiled out of the likelihood.
/// Immutable after construction; predict() is safe to call concurrently.
class GpModel {
 public:
  /// Maximum-likelihood fit. Requires n >= 2 distinct finite rows.
  static GpModel fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GpConfig& config = {});

  /// Model at fixed correlation parameters (n >= 1).
  static GpModel with_theta(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            std::vector<double> theta, const GpConfig& config = {});

  Prediction predict(std::span<const double> point) const;

  /// Batch prediction for the rows of `points`.
  void predict(const Eigen::MatrixXd& points, std::span<double> mean, std::span<double> variance) const;

  std::size_t size() const { return static_cast<std::size_t>(x_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(x_.cols()); }
  const Eigen::MatrixXd& inputs() const { return x_; }
  const Eigen::VectorXd& outputs() const { return y_; }
  const std::vector<double>& theta() const { return theta_; }
  const std::vector<double>& smoothness() const { return smoothness_; }
  double mu() const { return mu_; }
  double sigma2() const { return sigma2_; }
  double nugget() const { return nugget_; }
  double log_likelihood() const { return log_likelihood_; }
  /// Starting points of the multistart search with their log-likelihoods.
  const std::vector<LikelihoodStart>& starts() const { return starts_; }

  /// Correlation matrix without nugget.
  Eigen::MatrixXd correlation_matrix() const;

  /// X, y, theta, p, mu, sigma2 and nugget; from_json() rebuilds a model
  /// that predicts bit-for-bit identically.
  nlohmann::json to_json() const;
  static GpModel from_json(const nlohmann::json& dump);

 private:
  GpModel() = default;

  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;
  std::vector<double> theta_;
  std::vector<double> smoothness_;
  double nugget_ = 0.0;
  double mu_ = 0.0;
  double sigma2_ = 0.0;
  double log_likelihood_ = 0.0;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  Eigen::VectorXd alpha_;
  std::vector<LikelihoodStart> starts_;

  friend struct GpBuilder;
};

/// Power-exponential correlation matrix of the rows of `x` (no nugget).
Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& x, std::span<const double> theta,
                                   std::span<const double> smoothness);

}  // namespace msce
