#include <cmath>
#include <limits>
#include <stdexcept>

#include "internal.hpp"
#include "msce/solvers.hpp"

namespace msce {

InverseResult scalarization_solve(const InverseProblem& problem, const ScalarizationConfig& config,
                                  std::uint64_t seed) {
  const std::uint64_t start = detail::now_ns();
  problem.validate();
  if (config.n0 == 0 || config.n0 >= config.total) throw std::invalid_argument("scalarization needs 1 <= n0 < N");
  if (!(config.alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
  if (config.candidate_points == 0) throw std::invalid_argument("candidate set must be non-empty");

  const std::size_t d = problem.spec.dim;
  EvaluationLog log(problem, config.total);
  Rng candidate_rng = Rng::for_stream(seed, Stream::candidate);
  Rng gp_rng = Rng::for_stream(seed, Stream::gp_starts);
  Rng extraction_rng = Rng::for_stream(seed, Stream::extraction);

  const Design initial = lhd(config.n0, d, Rng::for_stream(seed, Stream::design).next(), config.initial_criterion,
                             config.initial_effort);
  const double none = std::numeric_limits<double>::quiet_NaN();
  for (Eigen::Index i = 0; i < initial.points.rows(); ++i) {
    log.evaluate(detail::row_of(initial.points, i), Phase::initial, 0, none);
  }

  Eigen::MatrixXd x = log.inputs();
  Eigen::VectorXd w = log.discrepancies();
  GpModel model = detail::fit_surrogate(x, w, config.gp, gp_rng, nullptr);
  while (log.calls() < config.total) {
    const Eigen::MatrixXd candidates = detail::random_candidates(config.candidate_points, d, candidate_rng);
    const std::vector<double> ei = global_min_ei_on(model, candidates, w.minCoeff());
    const CandidateChoice choice = argmax_on_candidates(ei, candidates, x);
    log.evaluate(detail::row_of(candidates, static_cast<Eigen::Index>(choice.row)), Phase::followup, 0, choice.value);
    x = log.inputs();
    w = log.discrepancies();
    model = detail::fit_surrogate(x, w, config.gp, gp_rng, &model);
  }

  Eigen::Index best = 0;
  const double w_min = w.minCoeff(&best);

  // Uncertainty set {x : w_hat(x) < w_min + alpha s(x)} on a dense random set.
  const Eigen::MatrixXd dense =
      detail::random_candidates(config.extraction_points_per_dim * d, d, extraction_rng);
  std::vector<double> mean(static_cast<std::size_t>(dense.rows())), variance(mean.size());
  model.predict(dense, mean, variance);
  std::vector<Eigen::Index> members;
  for (std::size_t i = 0; i < mean.size(); ++i) {
    if (mean[i] < w_min + config.alpha * std::sqrt(variance[i])) members.push_back(static_cast<Eigen::Index>(i));
  }
  Eigen::MatrixXd u_points(static_cast<Eigen::Index>(members.size()), dense.cols());
  for (std::size_t r = 0; r < members.size(); ++r) u_points.row(static_cast<Eigen::Index>(r)) = dense.row(members[r]);

  InverseResult result;
  result.solver = "scalarization";
  result.seed = seed;
  result.x_opt_unit = detail::row_of(x, best);
  result.x_opt = problem.spec.to_native(result.x_opt_unit);
  result.source = SolutionSource::best_training;
  result.delta_used = none;
  result.u_count = members.size();
  result.spread = spread(u_points);
  result.clusters = count_clusters(u_points, ExtractionConfig{}.cluster_radius);
  result.trail = log.trail();
  result.simulator_calls = log.calls();
  result.wall_ms = detail::elapsed_ms(start);
  return result;
}

}  // namespace msce
