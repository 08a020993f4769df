#include <limits>
#include <stdexcept>

#include "internal.hpp"
#include "msce/solvers.hpp"

namespace msce {

InverseResult msce_solve(const InverseProblem& problem, const MsceConfig& config, std::uint64_t seed) {
  const std::uint64_t start = detail::now_ns();
  problem.validate();
  config.plan.validate();
  detail::check_positions(config.dps, problem.target.size());
  if (config.plan.followups.size() != config.dps.size()) {
    throw std::invalid_argument("budget plan needs one follow-up count per DPS point");
  }
  if (!(config.alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
  if (config.candidate_points == 0) throw std::invalid_argument("candidate set must be non-empty");

  const std::size_t d = problem.spec.dim;
  EvaluationLog log(problem, config.plan.total);
  Rng candidate_rng = Rng::for_stream(seed, Stream::candidate);
  Rng gp_rng = Rng::for_stream(seed, Stream::gp_starts);
  Rng extraction_rng = Rng::for_stream(seed, Stream::extraction);

  const Design initial = lhd(config.plan.n0, d, Rng::for_stream(seed, Stream::design).next(),
                             config.initial_criterion, config.initial_effort);
  const double none = std::numeric_limits<double>::quiet_NaN();
  for (Eigen::Index i = 0; i < initial.points.rows(); ++i) {
    log.evaluate(detail::row_of(initial.points, i), Phase::initial, 0, none);
  }

  const std::vector<double> levels = detail::target_at(problem.target, config.dps);
  for (std::size_t j = 0; j < config.dps.size(); ++j) {
    Eigen::MatrixXd x = log.inputs();
    GpModel model = detail::fit_surrogate(x, log.projection(config.dps[j]), config.gp, gp_rng, nullptr);
    for (std::size_t f = 0; f < config.plan.followups[j]; ++f) {
      const Eigen::MatrixXd candidates = detail::random_candidates(config.candidate_points, d, candidate_rng);
      const std::vector<double> ei = contour_ei_on(model, candidates, levels[j], config.alpha);
      const CandidateChoice choice = argmax_on_candidates(ei, candidates, x);
      log.evaluate(detail::row_of(candidates, static_cast<Eigen::Index>(choice.row)), Phase::followup, j,
                   choice.value);
      x = log.inputs();
      model = detail::fit_surrogate(x, log.projection(config.dps[j]), config.gp, gp_rng, &model);
    }
  }

  const Eigen::MatrixXd x = log.inputs();
  std::vector<GpModel> models;
  models.reserve(config.dps.size());
  for (const std::size_t position : config.dps) {
    models.push_back(detail::fit_surrogate(x, log.projection(position), config.gp, gp_rng, nullptr));
  }

  ExtractionConfig extraction = config.extraction;
  extraction.alpha = config.alpha;
  const Eigen::MatrixXd dense = detail::random_candidates(extraction.points_per_dim * d, d, extraction_rng);
  const Eigen::VectorXd w = log.discrepancies();
  const Extraction found =
      extract_solution(models, dense, x, std::span<const double>(w.data(), static_cast<std::size_t>(w.size())),
                       problem.target.size(), levels, extraction);

  InverseResult result;
  result.solver = "msce";
  result.seed = seed;
  result.dps = config.dps;
  detail::apply_extraction(result, found, problem.spec);
  result.trail = log.trail();
  result.simulator_calls = log.calls();
  result.wall_ms = detail::elapsed_ms(start);
  return result;
}

}  // namespace msce
