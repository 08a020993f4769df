#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "msce/acquisition.hpp"
#include "msce/design.hpp"
#include "msce/gp.hpp"
#include "msce/simulators.hpp"

namespace msce {

/// Follow-up budget N - n0 split into per-sub-problem counts that differ by at
/// most one, larger shares first (35 over 3 parts: 12, 12, 11).
struct BudgetPlan {
  std::size_t n0 = 0;
  std::size_t total = 0;
  std::vector<std::size_t> followups;

  static BudgetPlan equal_split(std::size_t n0, std::size_t total, std::size_t parts);
  void validate() const;
};

/// Native-scale simulator call. Solvers never see the true input of the target.
using SimulatorFn = std::function<TimeSeries(std::span<const double> native_x)>;

struct InverseProblem {
  SimulatorSpec spec;
  TimeSeries target;
  /// Defaults to evaluate(spec, x) when empty.
  SimulatorFn simulator;

  void validate() const;
};

enum class Phase { initial, followup, wave };
std::string_view to_string(Phase phase);

struct AuditEntry {
  std::vector<double> x_unit;
  Phase phase = Phase::initial;
  /// 0-based sub-problem (MSCE) or wave (history matching); 0 otherwise.
  std::size_t stage = 0;
  /// Acquisition value that selected the point; NaN for design points.
  double criterion = 0.0;
  /// ||g(x) - g0|| over the full grid.
  double discrepancy = 0.0;
  double running_min = 0.0;
};

/// Counts and logs every simulator call, caching full series.
class EvaluationLog {
 public:
  EvaluationLog(const InverseProblem& problem, std::optional<std::size_t> budget);

  /// Evaluates at a unit-cube point. Throws std::logic_error past the budget.
  const TimeSeries& evaluate(std::span<const double> x_unit, Phase phase, std::size_t stage,
                             double criterion);

  std::size_t calls() const { return trail_.size(); }
  const std::vector<AuditEntry>& trail() const { return trail_; }
  const std::vector<TimeSeries>& outputs() const { return outputs_; }
  /// Unit-cube inputs, one row per call.
  Eigen::MatrixXd inputs() const;
  /// Responses at one 1-based grid position.
  Eigen::VectorXd projection(std::size_t position) const;
  Eigen::VectorXd discrepancies() const;

 private:
  const InverseProblem& problem_;
  std::optional<std::size_t> budget_;
  std::vector<AuditEntry> trail_;
  std::vector<TimeSeries> outputs_;
};

/// Sum over coordinates of the population variance; nullopt for an empty set.
std::optional<double> spread(const Eigen::MatrixXd& points);

/// Connected components of the graph joining points within `radius` (sup-norm).
std::size_t count_clusters(const Eigen::MatrixXd& points, double radius);

struct ExtractionConfig {
  double delta = 1e-5;
  double delta_max = 1e-2;
  double alpha = 0.67;
  /// Random-LHD extraction set of this many points per input dimension.
  std::size_t points_per_dim = 10000;
  double cluster_radius = 0.05;
  /// Rank candidates by root-mean-square discrepancy (full grid for training
  /// points, DPS for predictions) instead of the raw norms, which are sums
  /// over different numbers of time points.
  bool per_point_ranking = true;
};

enum class SolutionSource { contour_intersection, uncertainty_intersection, best_training };
std::string_view to_string(SolutionSource source);

/// Intersections of the per-DPS solution sets over an extraction set.
struct ContourSolutionSet {
  /// Extraction points (random rows first, then the training points).
  Eigen::MatrixXd points;
  std::size_t training_offset = 0;
  double delta = 0.0;
  /// Rows of `points` in every S_j(delta) and in every U_j.
  std::vector<std::size_t> s_members;
  std::vector<std::size_t> u_members;
  /// sqrt(sum_j (g_hat_j - g0_j)^2) at every row.
  std::vector<double> predicted_discrepancy;
};

struct Extraction {
  ContourSolutionSet sets;
  std::vector<double> x_opt_unit;
  SolutionSource source = SolutionSource::contour_intersection;
  /// Discrepancy used to rank x_opt: true full-grid discrepancy for training
  /// points, DPS-level predicted discrepancy otherwise.
  double x_opt_discrepancy = 0.0;
  bool x_opt_is_training = false;
  std::optional<double> spread;
  std::size_t clusters = 0;
  std::vector<std::string> fallbacks;
};

/// Membership sets at one tolerance, no escalation.
ContourSolutionSet contour_sets(const std::vector<GpModel>& models, const Eigen::MatrixXd& points,
                                std::span<const double> target_at_dps, double delta, double alpha,
                                std::size_t training_offset);

/// S/U intersections and x_opt with the delta ladder (x10 up to delta_max),
/// then the U intersection, then the best training point.
/// `training_discrepancy` holds ||g(x_i) - g0|| over all `series_length` points.
Extraction extract_solution(const std::vector<GpModel>& models, const Eigen::MatrixXd& random_points,
                            const Eigen::MatrixXd& training_x, std::span<const double> training_discrepancy,
                            std::size_t series_length, std::span<const double> target_at_dps,
                            const ExtractionConfig& config);

struct InverseResult {
  std::string solver;
  std::uint64_t seed = 0;
  std::vector<double> x_opt_unit;
  std::vector<double> x_opt;
  SolutionSource source = SolutionSource::contour_intersection;
  double delta_used = 0.0;
  std::size_t s_count = 0;
  std::size_t u_count = 0;
  std::optional<double> spread;
  std::size_t clusters = 0;
  std::vector<AuditEntry> trail;
  std::size_t simulator_calls = 0;
  std::vector<std::string> log;
  std::vector<std::size_t> dps;
  double wall_ms = 0.0;

  nlohmann::json to_json() const;
};

struct MsceConfig {
  BudgetPlan plan;
  /// 1-based grid positions; sub-problems run in this order.
  std::vector<std::size_t> dps;
  double alpha = 0.67;
  std::size_t candidate_points = 5000;
  LhdCriterion initial_criterion = LhdCriterion::maxpro;
  std::size_t initial_effort = 2000;
  ExtractionConfig extraction;
  GpConfig gp;
};

InverseResult msce_solve(const InverseProblem& problem, const MsceConfig& config, std::uint64_t seed);

struct ScalarizationConfig {
  std::size_t n0 = 0;
  std::size_t total = 0;
  double alpha = 0.67;
  std::size_t candidate_points = 5000;
  LhdCriterion initial_criterion = LhdCriterion::maxpro;
  std::size_t initial_effort = 2000;
  std::size_t extraction_points_per_dim = 10000;
  GpConfig gp;
};

InverseResult scalarization_solve(const InverseProblem& problem, const ScalarizationConfig& config,
                                  std::uint64_t seed);

struct HistoryMatchingConfig {
  /// 0 means 10 * d.
  std::size_t n0 = 0;
  std::size_t waves = 3;
  double cutoff = 3.0;
  std::size_t max_clusters = 10;
  std::size_t test_points = 5000;
  std::vector<std::size_t> dps;
  LhdCriterion initial_criterion = LhdCriterion::maxpro;
  std::size_t initial_effort = 2000;
  std::size_t kmeans_iterations = 100;
  ExtractionConfig extraction;
  GpConfig gp;
};

InverseResult hm_solve(const InverseProblem& problem, const HistoryMatchingConfig& config, std::uint64_t seed);

/// Seeded k-means++ with Lloyd iterations; returns one center per row.
Eigen::MatrixXd kmeans(const Eigen::MatrixXd& points, std::size_t clusters, std::uint64_t seed,
                       std::size_t max_iterations = 100);

}  // namespace msce
