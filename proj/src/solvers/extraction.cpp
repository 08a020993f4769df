#include <cmath>
#include <stdexcept>
#include <string>

#include "internal.hpp"
#include "msce/solvers.hpp"

namespace msce {
namespace {

struct SurrogateField {
  // Column j holds the prediction of model j at every extraction row.
  Eigen::MatrixXd mean;
  Eigen::MatrixXd sd;
};

SurrogateField predict_all(const std::vector<GpModel>& models, const Eigen::MatrixXd& points) {
  const Eigen::Index m = points.rows();
  SurrogateField field{Eigen::MatrixXd(m, static_cast<Eigen::Index>(models.size())),
                       Eigen::MatrixXd(m, static_cast<Eigen::Index>(models.size()))};
  std::vector<double> mean(static_cast<std::size_t>(m)), variance(static_cast<std::size_t>(m));
  for (std::size_t j = 0; j < models.size(); ++j) {
    models[j].predict(points, mean, variance);
    const auto col = static_cast<Eigen::Index>(j);
    for (Eigen::Index i = 0; i < m; ++i) {
      field.mean(i, col) = mean[static_cast<std::size_t>(i)];
      field.sd(i, col) = std::sqrt(variance[static_cast<std::size_t>(i)]);
    }
  }
  return field;
}

std::vector<std::size_t> within_delta(const SurrogateField& field, std::span<const double> target, double delta) {
  std::vector<std::size_t> members;
  for (Eigen::Index i = 0; i < field.mean.rows(); ++i) {
    bool inside = true;
    for (Eigen::Index j = 0; j < field.mean.cols() && inside; ++j) {
      inside = std::fabs(field.mean(i, j) - target[static_cast<std::size_t>(j)]) < delta;
    }
    if (inside) members.push_back(static_cast<std::size_t>(i));
  }
  return members;
}

std::vector<std::size_t> within_band(const SurrogateField& field, std::span<const double> target, double alpha) {
  std::vector<std::size_t> members;
  for (Eigen::Index i = 0; i < field.mean.rows(); ++i) {
    bool inside = true;
    for (Eigen::Index j = 0; j < field.mean.cols() && inside; ++j) {
      inside = std::fabs(field.mean(i, j) - target[static_cast<std::size_t>(j)]) < alpha * field.sd(i, j);
    }
    if (inside) members.push_back(static_cast<std::size_t>(i));
  }
  return members;
}

std::vector<double> predicted_norm(const SurrogateField& field, std::span<const double> target) {
  std::vector<double> out(static_cast<std::size_t>(field.mean.rows()));
  for (Eigen::Index i = 0; i < field.mean.rows(); ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < field.mean.cols(); ++j) {
      const double gap = field.mean(i, j) - target[static_cast<std::size_t>(j)];
      sum += gap * gap;
    }
    out[static_cast<std::size_t>(i)] = std::sqrt(sum);
  }
  return out;
}

Eigen::MatrixXd gather(const Eigen::MatrixXd& points, const std::vector<std::size_t>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), points.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = points.row(static_cast<Eigen::Index>(rows[r]));
  return out;
}

void check_inputs(const std::vector<GpModel>& models, std::span<const double> target_at_dps) {
  if (models.empty()) throw std::invalid_argument("extraction needs at least one surrogate");
  if (models.size() != target_at_dps.size()) throw std::invalid_argument("one target value per surrogate required");
}

}  // namespace

ContourSolutionSet contour_sets(const std::vector<GpModel>& models, const Eigen::MatrixXd& points,
                                std::span<const double> target_at_dps, double delta, double alpha,
                                std::size_t training_offset) {
  check_inputs(models, target_at_dps);
  if (points.rows() == 0) throw std::invalid_argument("extraction set is empty");
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");
  const SurrogateField field = predict_all(models, points);
  ContourSolutionSet sets;
  sets.points = points;
  sets.training_offset = training_offset;
  sets.delta = delta;
  sets.s_members = within_delta(field, target_at_dps, delta);
  sets.u_members = within_band(field, target_at_dps, alpha);
  sets.predicted_discrepancy = predicted_norm(field, target_at_dps);
  return sets;
}

Extraction extract_solution(const std::vector<GpModel>& models, const Eigen::MatrixXd& random_points,
                            const Eigen::MatrixXd& training_x, std::span<const double> training_discrepancy,
                            std::size_t series_length, std::span<const double> target_at_dps,
                            const ExtractionConfig& config) {
  check_inputs(models, target_at_dps);
  if (static_cast<std::size_t>(training_x.rows()) != training_discrepancy.size()) {
    throw std::invalid_argument("one discrepancy per training point required");
  }
  if (random_points.rows() + training_x.rows() == 0) throw std::invalid_argument("extraction set is empty");
  if (!(config.delta > 0.0) || !(config.delta_max >= config.delta)) {
    throw std::invalid_argument("extraction needs 0 < delta <= delta_max");
  }

  Extraction out;
  ContourSolutionSet& sets = out.sets;
  sets.points.resize(random_points.rows() + training_x.rows(), random_points.cols() ? random_points.cols() : training_x.cols());
  if (random_points.rows() > 0) sets.points.topRows(random_points.rows()) = random_points;
  if (training_x.rows() > 0) sets.points.bottomRows(training_x.rows()) = training_x;
  sets.training_offset = static_cast<std::size_t>(random_points.rows());

  const SurrogateField field = predict_all(models, sets.points);
  sets.predicted_discrepancy = predicted_norm(field, target_at_dps);
  sets.u_members = within_band(field, target_at_dps, config.alpha);

  double delta = config.delta;
  while (true) {
    sets.delta = delta;
    sets.s_members = within_delta(field, target_at_dps, delta);
    if (!sets.s_members.empty()) break;
    const double next = delta * 10.0;
    if (next > config.delta_max * (1.0 + 1e-12)) {
      out.fallbacks.push_back("contour intersection empty up to delta " + std::to_string(delta));
      break;
    }
    out.fallbacks.push_back("contour intersection empty at delta " + std::to_string(delta) + "; trying " +
                            std::to_string(next));
    delta = next;
  }

  if (series_length == 0) throw std::invalid_argument("series length must be >= 1");
  const double training_scale = config.per_point_ranking ? 1.0 / std::sqrt(static_cast<double>(series_length)) : 1.0;
  const double predicted_scale =
      config.per_point_ranking ? 1.0 / std::sqrt(static_cast<double>(target_at_dps.size())) : 1.0;
  auto rank = [&](std::size_t row) {
    return row >= sets.training_offset ? training_scale * training_discrepancy[row - sets.training_offset]
                                       : predicted_scale * sets.predicted_discrepancy[row];
  };
  auto pick = [&](const std::vector<std::size_t>& members) {
    std::size_t best = members.front();
    for (const std::size_t row : members) {
      if (rank(row) < rank(best)) best = row;
    }
    return best;
  };

  const std::vector<std::size_t>* solution_set = nullptr;
  if (!sets.s_members.empty()) {
    out.source = SolutionSource::contour_intersection;
    solution_set = &sets.s_members;
  } else if (!sets.u_members.empty()) {
    out.source = SolutionSource::uncertainty_intersection;
    out.fallbacks.push_back("using the uncertainty intersection");
    solution_set = &sets.u_members;
  } else {
    out.source = SolutionSource::best_training;
    out.fallbacks.push_back("uncertainty intersection empty; using the best training point");
  }

  std::size_t chosen = 0;
  if (solution_set != nullptr) {
    chosen = pick(*solution_set);
  } else {
    if (training_x.rows() == 0) throw std::runtime_error("no solution: every set is empty and there are no training points");
    std::vector<std::size_t> training_rows(static_cast<std::size_t>(training_x.rows()));
    for (std::size_t i = 0; i < training_rows.size(); ++i) training_rows[i] = sets.training_offset + i;
    chosen = pick(training_rows);
  }
  out.x_opt_unit = detail::row_of(sets.points, static_cast<Eigen::Index>(chosen));
  out.x_opt_discrepancy = rank(chosen);
  out.x_opt_is_training = chosen >= sets.training_offset;
  out.spread = spread(gather(sets.points, sets.u_members));
  if (solution_set != nullptr) out.clusters = count_clusters(gather(sets.points, *solution_set), config.cluster_radius);
  return out;
}

namespace detail {

void apply_extraction(InverseResult& result, const Extraction& extraction, const SimulatorSpec& spec) {
  result.x_opt_unit = extraction.x_opt_unit;
  result.x_opt = spec.to_native(extraction.x_opt_unit);
  result.source = extraction.source;
  result.delta_used = extraction.sets.delta;
  result.s_count = extraction.sets.s_members.size();
  result.u_count = extraction.sets.u_members.size();
  result.spread = extraction.spread;
  result.clusters = extraction.clusters;
  result.log.insert(result.log.end(), extraction.fallbacks.begin(), extraction.fallbacks.end());
}

std::vector<double> target_at(const TimeSeries& target, const std::vector<std::size_t>& positions) {
  std::vector<double> out;
  out.reserve(positions.size());
  for (const std::size_t p : positions) out.push_back(target.values.at(p - 1));
  return out;
}

void check_positions(const std::vector<std::size_t>& positions, std::size_t length) {
  if (positions.empty()) throw std::invalid_argument("DPS is empty");
  for (const std::size_t p : positions) {
    if (p < 1 || p > length) {
      throw std::invalid_argument("DPS position " + std::to_string(p) + " outside 1.." + std::to_string(length));
    }
  }
}

}  // namespace detail

}  // namespace msce
