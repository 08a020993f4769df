#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "internal.hpp"
#include "msce/design.hpp"
#include "msce/kernels.hpp"
#include "msce/solvers.hpp"

namespace msce {

namespace detail {

std::vector<double> row_of(const Eigen::MatrixXd& m, Eigen::Index i) {
  std::vector<double> out(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index k = 0; k < m.cols(); ++k) out[static_cast<std::size_t>(k)] = m(i, k);
  return out;
}

Eigen::MatrixXd random_candidates(std::size_t n, std::size_t d, Rng& rng) {
  return lhd(n, d, rng.next(), LhdCriterion::random, 0, true).points;
}

GpModel fit_surrogate(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, GpConfig config, Rng& starts,
                      const GpModel* previous) {
  config.seed = starts.next();
  if (previous != nullptr && config.initial_theta.empty()) config.initial_theta = previous->theta();
  return GpModel::fit(x, y, config);
}

std::uint64_t now_ns() {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now().time_since_epoch())
          .count());
}

double elapsed_ms(std::uint64_t start_ns) { return static_cast<double>(now_ns() - start_ns) * 1e-6; }

}  // namespace detail

BudgetPlan BudgetPlan::equal_split(std::size_t n0, std::size_t total, std::size_t parts) {
  if (parts == 0) throw std::invalid_argument("budget plan needs at least one part");
  if (n0 >= total) throw std::invalid_argument("budget plan needs n0 < N");
  const std::size_t extra = total - n0;
  BudgetPlan plan{n0, total, std::vector<std::size_t>(parts, extra / parts)};
  for (std::size_t j = 0; j < extra % parts; ++j) ++plan.followups[j];
  return plan;
}

void BudgetPlan::validate() const {
  if (n0 == 0) throw std::invalid_argument("budget plan: n0 must be >= 1");
  if (n0 >= total) throw std::invalid_argument("budget plan: need n0 < N");
  if (followups.empty()) throw std::invalid_argument("budget plan: no sub-problems");
  const std::size_t sum = std::accumulate(followups.begin(), followups.end(), std::size_t{0});
  if (sum != total - n0) throw std::invalid_argument("budget plan: follow-up counts must sum to N - n0");
  const auto [lo, hi] = std::minmax_element(followups.begin(), followups.end());
  if (*hi - *lo > 1) throw std::invalid_argument("budget plan: follow-up counts differ by more than one");
}

void InverseProblem::validate() const {
  spec.validate();
  target.validate();
  if (!(target.grid == spec.grid)) throw std::invalid_argument("target grid differs from the simulator grid");
  if (!simulator && spec.kind == SimulatorKind::external) {
    throw std::invalid_argument("external simulator spec needs a simulator callable");
  }
}

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::initial: return "initial";
    case Phase::followup: return "followup";
    case Phase::wave: return "wave";
  }
  return "unknown";
}

std::string_view to_string(SolutionSource source) {
  switch (source) {
    case SolutionSource::contour_intersection: return "contour_intersection";
    case SolutionSource::uncertainty_intersection: return "uncertainty_intersection";
    case SolutionSource::best_training: return "best_training";
  }
  return "unknown";
}

EvaluationLog::EvaluationLog(const InverseProblem& problem, std::optional<std::size_t> budget)
    : problem_(problem), budget_(budget) {}

const TimeSeries& EvaluationLog::evaluate(std::span<const double> x_unit, Phase phase, std::size_t stage,
                                          double criterion) {
  if (budget_ && trail_.size() >= *budget_) {
    throw std::logic_error("simulator budget of " + std::to_string(*budget_) + " calls exhausted");
  }
  const std::vector<double> native = problem_.spec.to_native(x_unit);
  TimeSeries series = problem_.simulator ? problem_.simulator(native) : msce::evaluate(problem_.spec, native);
  series.validate();
  if (!(series.grid == problem_.target.grid)) throw std::runtime_error("simulator returned a series on the wrong grid");
  AuditEntry entry;
  entry.x_unit.assign(x_unit.begin(), x_unit.end());
  entry.phase = phase;
  entry.stage = stage;
  entry.criterion = criterion;
  entry.discrepancy = std::sqrt(kernels::sum_squared_diff(series.values, problem_.target.values));
  entry.running_min = trail_.empty() ? entry.discrepancy : std::min(trail_.back().running_min, entry.discrepancy);
  trail_.push_back(std::move(entry));
  outputs_.push_back(std::move(series));
  return outputs_.back();
}

Eigen::MatrixXd EvaluationLog::inputs() const {
  const Eigen::Index d = static_cast<Eigen::Index>(problem_.spec.dim);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(trail_.size()), d);
  for (std::size_t i = 0; i < trail_.size(); ++i) {
    for (Eigen::Index k = 0; k < d; ++k) x(static_cast<Eigen::Index>(i), k) = trail_[i].x_unit[static_cast<std::size_t>(k)];
  }
  return x;
}

Eigen::VectorXd EvaluationLog::projection(std::size_t position) const {
  if (position < 1 || position > problem_.target.size()) throw std::out_of_range("grid position out of range");
  Eigen::VectorXd y(static_cast<Eigen::Index>(outputs_.size()));
  for (std::size_t i = 0; i < outputs_.size(); ++i) y(static_cast<Eigen::Index>(i)) = outputs_[i].values[position - 1];
  return y;
}

Eigen::VectorXd EvaluationLog::discrepancies() const {
  Eigen::VectorXd w(static_cast<Eigen::Index>(trail_.size()));
  for (std::size_t i = 0; i < trail_.size(); ++i) w(static_cast<Eigen::Index>(i)) = trail_[i].discrepancy;
  return w;
}

std::optional<double> spread(const Eigen::MatrixXd& points) {
  if (points.rows() == 0) return std::nullopt;
  const double n = static_cast<double>(points.rows());
  double total = 0.0;
  for (Eigen::Index k = 0; k < points.cols(); ++k) {
    const double mean = points.col(k).sum() / n;
    total += (points.col(k).array() - mean).square().sum() / n;
  }
  return total;
}

std::size_t count_clusters(const Eigen::MatrixXd& points, double radius) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (n == 0) return 0;
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  };
  // Sweep in order of the first coordinate; only pairs within `radius` there can link.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return points(static_cast<Eigen::Index>(a), 0) < points(static_cast<Eigen::Index>(b), 0);
  });
  std::size_t components = n;
  for (std::size_t p = 0; p < n; ++p) {
    const auto a = static_cast<Eigen::Index>(order[p]);
    for (std::size_t q = p + 1; q < n; ++q) {
      const auto b = static_cast<Eigen::Index>(order[q]);
      if (points(b, 0) - points(a, 0) > radius) break;
      if ((points.row(a) - points.row(b)).cwiseAbs().maxCoeff() > radius) continue;
      const std::size_t ra = find(order[p]);
      const std::size_t rb = find(order[q]);
      if (ra != rb) {
        parent[ra] = rb;
        --components;
      }
    }
  }
  return components;
}

namespace {

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

nlohmann::json InverseResult::to_json() const {
  nlohmann::json out;
  out["solver"] = solver;
  out["seed"] = seed;
  out["x_opt_unit"] = x_opt_unit;
  out["x_opt"] = x_opt;
  out["source"] = std::string(to_string(source));
  out["delta_used"] = number_or_null(delta_used);
  out["s_count"] = s_count;
  out["u_count"] = u_count;
  out["spread"] = spread ? nlohmann::json(*spread) : nlohmann::json(nullptr);
  out["clusters"] = clusters;
  out["simulator_calls"] = simulator_calls;
  out["dps"] = dps;
  out["log"] = log;
  nlohmann::json trail_json = nlohmann::json::array();
  for (const auto& e : trail) {
    trail_json.push_back({{"x_unit", e.x_unit},
                          {"phase", std::string(to_string(e.phase))},
                          {"stage", e.stage},
                          {"criterion", number_or_null(e.criterion)},
                          {"discrepancy", e.discrepancy},
                          {"running_min", e.running_min}});
  }
  out["trail"] = std::move(trail_json);
  return out;
}

}  // namespace msce
