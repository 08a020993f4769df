#include "msce/gp.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "msce/design.hpp"
#include "msce/detail/nelder_mead.hpp"
#include "msce/kernels.hpp"

namespace msce {
namespace {

constexpr Eigen::Index kPredictChunk = 256;

void validate_training(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::size_t min_rows) {
  if (x.rows() != y.size()) throw std::invalid_argument("GP: X and y have different row counts");
  if (static_cast<std::size_t>(x.rows()) < min_rows) {
    throw std::invalid_argument("GP: need at least " + std::to_string(min_rows) + " training points");
  }
  if (x.cols() < 1) throw std::invalid_argument("GP: inputs need at least one column");
  if (!x.allFinite() || !y.allFinite()) throw std::invalid_argument("GP: training data contains NaN/inf");
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < x.rows(); ++j) {
      if ((x.row(i).array() == x.row(j).array()).all()) {
        throw std::invalid_argument("GP: duplicate training rows " + std::to_string(i) + " and " +
                                    std::to_string(j));
      }
    }
  }
}

// Fills column j of `out` with the correlations between training rows and `point`.
void correlation_column(const Eigen::MatrixXd& x, std::span<const double> point,
                        std::span<const double> theta, std::span<const double> smoothness,
                        double* out) {
  const auto n = static_cast<std::size_t>(x.rows());
  std::span<double> acc(out, n);
  std::fill(acc.begin(), acc.end(), 0.0);
  for (Eigen::Index k = 0; k < x.cols(); ++k) {
    const auto kk = static_cast<std::size_t>(k);
    kernels::add_power_distance(std::span<const double>(x.col(k).data(), n), point[kk], theta[kk],
                                smoothness[kk], acc);
  }
  kernels::exp_negate(acc);
}

}  // namespace

std::vector<double> GpConfig::smoothness_for(std::size_t dim) const {
  if (!smoothness_per_dim.empty()) {
    if (smoothness_per_dim.size() != dim) {
      throw std::invalid_argument("GP: smoothness_per_dim has wrong length");
    }
    return smoothness_per_dim;
  }
  return std::vector<double>(dim, smoothness);
}

void GpConfig::validate(std::size_t dim) const {
  for (const double p : smoothness_for(dim)) {
    if (!(p > 0.0 && p <= 2.0)) throw std::invalid_argument("GP: smoothness must lie in (0, 2]");
  }
  if (!(nugget >= 0.0) || !(max_nugget >= nugget)) {
    throw std::invalid_argument("GP: need 0 <= nugget <= max_nugget");
  }
  if (!(theta_lower > 0.0 && theta_upper > theta_lower)) {
    throw std::invalid_argument("GP: need 0 < theta_lower < theta_upper");
  }
  if (multistarts < 1) throw std::invalid_argument("GP: multistarts must be >= 1");
  if (!initial_theta.empty()) {
    if (initial_theta.size() != dim) throw std::invalid_argument("GP: initial_theta has wrong dimension");
    for (const double t : initial_theta) {
      if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("GP: initial_theta must be positive");
    }
  }
}

Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& x, std::span<const double> theta,
                                   std::span<const double> smoothness) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd r(n, n);
  std::vector<double> point(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < x.cols(); ++k) point[static_cast<std::size_t>(k)] = x(i, k);
    correlation_column(x, point, theta, smoothness, r.col(i).data());
  }
  return r.selfadjointView<Eigen::Lower>();
}

struct GpBuilder {
  // Factorizes R + nugget*I and profiles mu, sigma^2. Returns nullopt when no
  // admissible nugget gives a positive-definite matrix.
  static std::optional<GpModel> build(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                      std::vector<double> theta, std::vector<double> smoothness,
                                      NuggetPolicy policy, double nugget, double max_nugget) {
    GpModel model;
    model.x_ = x;
    model.y_ = y;
    model.theta_ = std::move(theta);
    model.smoothness_ = std::move(smoothness);

    const Eigen::Index n = x.rows();
    const Eigen::MatrixXd base = correlation_matrix(x, model.theta_, model.smoothness_);
    double current = nugget;
    bool factored = false;
    while (true) {
      Eigen::MatrixXd r = base;
      r.diagonal().array() += current;
      model.chol_.compute(r);
      if (model.chol_.info() == Eigen::Success &&
          model.chol_.matrixLLT().diagonal().minCoeff() > 0.0) {
        factored = true;
        break;
      }
      if (policy == NuggetPolicy::fixed || current >= max_nugget) break;
      current = current > 0.0 ? std::min(current * 10.0, max_nugget) : 1e-10;
    }
    if (!factored) return std::nullopt;
    model.nugget_ = current;

    const bool constant = (y.array() == y(0)).all();
    if (constant) {
      model.mu_ = y(0);
      model.sigma2_ = 0.0;
      model.alpha_ = Eigen::VectorXd::Zero(n);
      model.log_likelihood_ = std::numeric_limits<double>::infinity();
      return model;
    }

    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    const Eigen::VectorXd r_inv_ones = model.chol_.solve(ones);
    const Eigen::VectorXd r_inv_y = model.chol_.solve(y);
    model.mu_ = ones.dot(r_inv_y) / ones.dot(r_inv_ones);
    const Eigen::VectorXd resid = y.array() - model.mu_;
    model.alpha_ = model.chol_.solve(resid);
    model.sigma2_ = std::max(resid.dot(model.alpha_) / static_cast<double>(n), 0.0);

    const double log_det = 2.0 * model.chol_.matrixLLT().diagonal().array().log().sum();
    const double nd = static_cast<double>(n);
    if (model.sigma2_ > 0.0) {
      model.log_likelihood_ =
          -0.5 * (nd * std::log(2.0 * std::numbers::pi * model.sigma2_) + log_det + nd);
    } else {
      model.log_likelihood_ = -std::numeric_limits<double>::infinity();
    }
    if (!std::isfinite(model.mu_) || !model.alpha_.allFinite()) return std::nullopt;
    return model;
  }
};

GpModel GpModel::with_theta(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            std::vector<double> theta, const GpConfig& config) {
  validate_training(x, y, 1);
  const auto d = static_cast<std::size_t>(x.cols());
  config.validate(d);
  if (theta.size() != d) throw std::invalid_argument("GP: theta has wrong length");
  for (const double t : theta) {
    if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("GP: theta must be positive");
  }
  auto model = GpBuilder::build(x, y, std::move(theta), config.smoothness_for(d),
                                config.nugget_policy, config.nugget, config.max_nugget);
  if (!model) {
    throw std::runtime_error("GP: correlation matrix not positive definite with nugget up to " +
                             std::to_string(config.max_nugget));
  }
  return std::move(*model);
}

GpModel GpModel::fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GpConfig& config) {
  validate_training(x, y, 2);
  const auto d = static_cast<std::size_t>(x.cols());
  config.validate(d);
  const std::vector<double> smoothness = config.smoothness_for(d);

  const double lo = std::log(config.theta_lower);
  const double hi = std::log(config.theta_upper);
  const std::vector<double> lower(d, lo);
  const std::vector<double> upper(d, hi);

  auto theta_of = [](std::span<const double> log_theta) {
    std::vector<double> theta(log_theta.size());
    for (std::size_t k = 0; k < theta.size(); ++k) theta[k] = std::exp(log_theta[k]);
    return theta;
  };
  auto build_at = [&](std::span<const double> log_theta) {
    return GpBuilder::build(x, y, theta_of(log_theta), smoothness, config.nugget_policy,
                            config.nugget, config.max_nugget);
  };

  if ((y.array() == y(0)).all()) {
    const std::vector<double> mid(d, 0.5 * (lo + hi));
    auto model = build_at(mid);
    if (!model) throw std::runtime_error("GP: correlation matrix not positive definite");
    return std::move(*model);
  }

  std::vector<std::vector<double>> starts;
  if (config.multistarts == 1) {
    starts.emplace_back(d, 0.5 * (lo + hi));
  } else {
    const Design plan = lhd(config.multistarts, d, config.seed, LhdCriterion::random);
    for (Eigen::Index i = 0; i < plan.points.rows(); ++i) {
      std::vector<double> start(d);
      for (std::size_t k = 0; k < d; ++k) {
        start[k] = lo + plan.points(i, static_cast<Eigen::Index>(k)) * (hi - lo);
      }
      starts.push_back(std::move(start));
    }
  }
  if (!config.initial_theta.empty()) {
    std::vector<double> start(d);
    for (std::size_t k = 0; k < d; ++k) start[k] = std::clamp(std::log(config.initial_theta[k]), lo, hi);
    starts.push_back(std::move(start));
  }

  auto objective = [&](std::span<const double> log_theta) {
    const auto model = build_at(log_theta);
    if (!model || !std::isfinite(model->log_likelihood_)) return HUGE_VAL;
    return -model->log_likelihood_;
  };

  std::vector<LikelihoodStart> recorded;
  std::optional<std::vector<double>> best_log_theta;
  double best_value = HUGE_VAL;
  auto norm_sq = [](const std::vector<double>& v) {
    double s = 0.0;
    for (const double e : v) s += e * e;
    return s;
  };
  for (const auto& start : starts) {
    const double start_value = objective(start);
    recorded.push_back(LikelihoodStart{theta_of(start), -start_value});
    const auto result = detail::nelder_mead(objective, start, lower, upper, 0.1 * (hi - lo),
                                            config.max_evaluations);
    std::vector<double> candidate = result.x;
    double value = result.value;
    if (start_value < value) {
      candidate = start;
      value = start_value;
    }
    if (value >= HUGE_VAL) continue;
    const bool better = value < best_value;
    const bool tie = value == best_value && best_log_theta && norm_sq(candidate) < norm_sq(*best_log_theta);
    if (better || tie) {
      best_value = value;
      best_log_theta = candidate;
    }
  }
  if (!best_log_theta) {
    std::ostringstream msg;
    msg << "GP: no admissible correlation parameters; correlation matrix not positive definite "
        << "at any of " << starts.size() << " starts with nugget up to " << config.max_nugget
        << " (n=" << x.rows() << ", d=" << d << ")";
    throw std::runtime_error(msg.str());
  }
  auto model = build_at(*best_log_theta);
  model->starts_ = std::move(recorded);
  return std::move(*model);
}

Prediction GpModel::predict(std::span<const double> point) const {
  if (point.size() != dim()) throw std::invalid_argument("GP: prediction point has wrong dimension");
  Eigen::MatrixXd p(1, static_cast<Eigen::Index>(dim()));
  for (std::size_t k = 0; k < dim(); ++k) p(0, static_cast<Eigen::Index>(k)) = point[k];
  Prediction out;
  predict(p, std::span<double>(&out.mean, 1), std::span<double>(&out.variance, 1));
  return out;
}

void GpModel::predict(const Eigen::MatrixXd& points, std::span<double> mean,
                      std::span<double> variance) const {
  if (static_cast<std::size_t>(points.cols()) != dim()) {
    throw std::invalid_argument("GP: prediction points have wrong dimension");
  }
  const Eigen::Index m = points.rows();
  if (mean.size() != static_cast<std::size_t>(m) || variance.size() != static_cast<std::size_t>(m)) {
    throw std::invalid_argument("GP: output spans have wrong length");
  }
  const Eigen::Index n = x_.rows();
  const auto n_size = static_cast<std::size_t>(n);
  std::vector<double> point(dim());
  Eigen::MatrixXd cross(n, std::min(kPredictChunk, m));
  for (Eigen::Index begin = 0; begin < m; begin += kPredictChunk) {
    const Eigen::Index count = std::min(kPredictChunk, m - begin);
    for (Eigen::Index j = 0; j < count; ++j) {
      for (std::size_t k = 0; k < dim(); ++k) point[k] = points(begin + j, static_cast<Eigen::Index>(k));
      correlation_column(x_, point, theta_, smoothness_, cross.col(j).data());
      mean[static_cast<std::size_t>(begin + j)] =
          mu_ + kernels::dot(std::span<const double>(cross.col(j).data(), n_size),
                             std::span<const double>(alpha_.data(), n_size));
    }
    auto block = cross.leftCols(count);
    chol_.matrixL().solveInPlace(block);
    for (Eigen::Index j = 0; j < count; ++j) {
      const double explained = block.col(j).squaredNorm();
      variance[static_cast<std::size_t>(begin + j)] = std::max(sigma2_ * (1.0 - explained), 0.0);
    }
  }
}

Eigen::MatrixXd GpModel::correlation_matrix() const {
  return msce::correlation_matrix(x_, theta_, smoothness_);
}

nlohmann::json GpModel::to_json() const {
  nlohmann::json dump;
  std::vector<std::vector<double>> rows(size(), std::vector<double>(dim()));
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t k = 0; k < dim(); ++k) {
      rows[i][k] = x_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
    }
  }
  dump["X"] = rows;
  dump["y"] = std::vector<double>(y_.data(), y_.data() + y_.size());
  dump["theta"] = theta_;
  dump["p"] = smoothness_;
  dump["mu"] = mu_;
  dump["sigma2"] = sigma2_;
  dump["nugget"] = nugget_;
  return dump;
}

GpModel GpModel::from_json(const nlohmann::json& dump) {
  const auto rows = dump.at("X").get<std::vector<std::vector<double>>>();
  const auto ys = dump.at("y").get<std::vector<double>>();
  if (rows.empty() || rows.size() != ys.size()) throw std::invalid_argument("GP dump: bad X/y");
  const std::size_t d = rows.front().size();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != d) throw std::invalid_argument("GP dump: ragged X");
    for (std::size_t k = 0; k < d; ++k) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    }
  }
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
  GpConfig config;
  config.smoothness_per_dim = dump.at("p").get<std::vector<double>>();
  config.nugget_policy = NuggetPolicy::fixed;
  config.nugget = dump.at("nugget").get<double>();
  config.max_nugget = config.nugget;
  return with_theta(x, y, dump.at("theta").get<std::vector<double>>(), config);
}

}  // namespace msce
