#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "internal.hpp"
#include "msce/solvers.hpp"

namespace msce {
namespace {

double squared_distance(const Eigen::MatrixXd& a, Eigen::Index i, const Eigen::MatrixXd& b, Eigen::Index j) {
  return (a.row(i) - b.row(j)).squaredNorm();
}

Eigen::Index nearest_row(const Eigen::MatrixXd& rows, const Eigen::MatrixXd& from, Eigen::Index i) {
  Eigen::Index best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    const double dist = squared_distance(rows, r, from, i);
    if (dist < best_d) {
      best_d = dist;
      best = r;
    }
  }
  return best;
}

}  // namespace

Eigen::MatrixXd kmeans(const Eigen::MatrixXd& points, std::size_t clusters, std::uint64_t seed,
                       std::size_t max_iterations) {
  const Eigen::Index n = points.rows();
  if (clusters == 0 || static_cast<Eigen::Index>(clusters) > n) {
    throw std::invalid_argument("k-means needs 1 <= clusters <= number of points");
  }
  const auto m = static_cast<Eigen::Index>(clusters);
  Rng rng(seed);
  Eigen::MatrixXd centers(m, points.cols());
  centers.row(0) = points.row(static_cast<Eigen::Index>(rng.below(static_cast<std::size_t>(n))));
  std::vector<double> nearest(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  for (Eigen::Index c = 1; c < m; ++c) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      auto& d = nearest[static_cast<std::size_t>(i)];
      d = std::min(d, squared_distance(points, i, centers, c - 1));
      total += d;
    }
    Eigen::Index pick = n - 1;
    if (total > 0.0) {
      double u = rng.uniform() * total;
      for (Eigen::Index i = 0; i < n; ++i) {
        u -= nearest[static_cast<std::size_t>(i)];
        if (u < 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.below(static_cast<std::size_t>(n)));
    }
    centers.row(c) = points.row(pick);
  }

  std::vector<Eigen::Index> assignment(static_cast<std::size_t>(n), -1);
  for (std::size_t iteration = 0; iteration < max_iterations; ++iteration) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index c = nearest_row(centers, points, i);
      if (assignment[static_cast<std::size_t>(i)] != c) {
        assignment[static_cast<std::size_t>(i)] = c;
        changed = true;
      }
    }
    if (!changed) break;
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(m, points.cols());
    std::vector<std::size_t> counts(static_cast<std::size_t>(m), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index c = assignment[static_cast<std::size_t>(i)];
      sums.row(c) += points.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    for (Eigen::Index c = 0; c < m; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) centers.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
    }
  }
  return centers;
}

InverseResult hm_solve(const InverseProblem& problem, const HistoryMatchingConfig& config, std::uint64_t seed) {
  const std::uint64_t start = detail::now_ns();
  problem.validate();
  detail::check_positions(config.dps, problem.target.size());
  if (config.waves < 1) throw std::invalid_argument("history matching needs at least one wave");
  if (!(config.cutoff > 0.0)) throw std::invalid_argument("implausibility cutoff must be > 0");
  if (config.max_clusters < 1) throw std::invalid_argument("history matching needs at least one cluster");
  if (config.test_points == 0) throw std::invalid_argument("test set must be non-empty");

  const std::size_t d = problem.spec.dim;
  const std::size_t n0 = config.n0 == 0 ? 10 * d : config.n0;
  EvaluationLog log(problem, std::nullopt);
  Rng candidate_rng = Rng::for_stream(seed, Stream::candidate);
  Rng gp_rng = Rng::for_stream(seed, Stream::gp_starts);
  Rng kmeans_rng = Rng::for_stream(seed, Stream::kmeans);
  Rng extraction_rng = Rng::for_stream(seed, Stream::extraction);

  InverseResult result;
  result.solver = "history_matching";
  result.seed = seed;
  result.dps = config.dps;

  const Design initial =
      lhd(n0, d, Rng::for_stream(seed, Stream::design).next(), config.initial_criterion, config.initial_effort);
  const double none = std::numeric_limits<double>::quiet_NaN();
  for (Eigen::Index i = 0; i < initial.points.rows(); ++i) {
    log.evaluate(detail::row_of(initial.points, i), Phase::initial, 0, none);
  }

  const std::vector<double> levels = detail::target_at(problem.target, config.dps);
  auto fit_all = [&](const Eigen::MatrixXd& x) {
    std::vector<GpModel> models;
    models.reserve(config.dps.size());
    for (const std::size_t position : config.dps) {
      models.push_back(detail::fit_surrogate(x, log.projection(position), config.gp, gp_rng, nullptr));
    }
    return models;
  };

  for (std::size_t wave = 0; wave < config.waves; ++wave) {
    const Eigen::MatrixXd x = log.inputs();
    const std::vector<GpModel> models = fit_all(x);
    const Eigen::MatrixXd test = detail::random_candidates(config.test_points, d, candidate_rng);
    const auto m = static_cast<std::size_t>(test.rows());
    std::vector<double> worst(m, 0.0);
    std::vector<double> mean(m), variance(m);
    for (std::size_t j = 0; j < models.size(); ++j) {
      models[j].predict(test, mean, variance);
      for (std::size_t i = 0; i < m; ++i) {
        const double value[] = {mean[i]};
        const double sd[] = {std::sqrt(variance[i])};
        worst[i] = std::max(worst[i], implausibility(value, sd, std::span<const double>(&levels[j], 1)));
      }
    }

    auto plausible_at = [&](double cutoff) {
      std::vector<Eigen::Index> rows;
      for (std::size_t i = 0; i < m; ++i) {
        if (worst[i] <= cutoff) rows.push_back(static_cast<Eigen::Index>(i));
      }
      return rows;
    };
    std::vector<Eigen::Index> plausible = plausible_at(config.cutoff);
    if (plausible.empty()) {
      const double relaxed = config.cutoff * 1.5;
      result.log.push_back("wave " + std::to_string(wave + 1) + ": no plausible points; cutoff relaxed to " +
                           std::to_string(relaxed));
      plausible = plausible_at(relaxed);
    }
    if (plausible.empty()) {
      result.log.push_back("wave " + std::to_string(wave + 1) + ": no plausible points; stopping early");
      break;
    }

    Eigen::MatrixXd kept(static_cast<Eigen::Index>(plausible.size()), test.cols());
    for (std::size_t r = 0; r < plausible.size(); ++r) kept.row(static_cast<Eigen::Index>(r)) = test.row(plausible[r]);
    const std::size_t clusters = std::min(config.max_clusters, plausible.size());
    const Eigen::MatrixXd centers = kmeans(kept, clusters, kmeans_rng.next(), config.kmeans_iterations);

    std::vector<Eigen::Index> chosen;
    for (Eigen::Index c = 0; c < centers.rows(); ++c) {
      const Eigen::Index snapped = nearest_row(kept, centers, c);
      if (std::find(chosen.begin(), chosen.end(), snapped) == chosen.end()) chosen.push_back(snapped);
    }
    for (const Eigen::Index r : chosen) {
      log.evaluate(detail::row_of(kept, r), Phase::wave, wave, worst[static_cast<std::size_t>(plausible[static_cast<std::size_t>(r)])]);
    }
  }

  const Eigen::MatrixXd x = log.inputs();
  const std::vector<GpModel> models = fit_all(x);
  const Eigen::MatrixXd dense = detail::random_candidates(config.extraction.points_per_dim * d, d, extraction_rng);
  const Eigen::VectorXd w = log.discrepancies();
  const Extraction found =
      extract_solution(models, dense, x, std::span<const double>(w.data(), static_cast<std::size_t>(w.size())),
                       problem.target.size(), levels, config.extraction);
  detail::apply_extraction(result, found, problem.spec);
  result.trail = log.trail();
  result.simulator_calls = log.calls();
  result.wall_ms = detail::elapsed_ms(start);
  return result;
}

}  // namespace msce
