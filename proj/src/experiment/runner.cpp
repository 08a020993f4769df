#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "msce/experiment.hpp"

namespace msce {
namespace {

std::string csv_optional(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

std::string fixed_ms(double ms) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, ms, std::chars_format::fixed, 3);
  return std::string(buffer, result.ptr);
}

std::string run_stem(const RunRow& row) {
  return row.solver + "_r" + std::to_string(row.replication);
}

SimulatorFn make_simulator(const SimulatorSpec& spec, std::uint64_t seed) {
  if (spec.noise_sd <= 0.0) return {};
  auto noise = std::make_shared<Rng>(Rng::for_stream(seed, Stream::simulator_noise));
  return [spec, noise](std::span<const double> x) { return evaluate(spec, x, noise.get()); };
}

nlohmann::json config_echo(const ExperimentConfig& config, const SolverSettings& s) {
  nlohmann::json out;
  out["name"] = config.name;
  out["simulator"] = std::string(to_string(config.spec.kind));
  out["noise_sd"] = config.spec.noise_sd;
  if (config.x0) out["x0"] = *config.x0;
  if (config.target_file) out["target_file"] = config.target_file->string();
  out["target_seed"] = config.target_seed;
  out["base_seed"] = config.base_seed;
  out["seed_from_environment"] = config.seed_from_environment;
  out["solver"] = {{"kind", std::string(to_string(s.kind))},
                   {"n0", s.n0},
                   {"N", s.total},
                   {"alpha", s.alpha},
                   {"delta", s.delta},
                   {"delta_max", s.delta_max},
                   {"candidates", s.candidates},
                   {"extraction_per_dim", s.extraction_per_dim},
                   {"cutoff", s.cutoff},
                   {"waves", s.waves},
                   {"clusters", s.clusters}};
  out["gp"] = {{"smoothness", config.gp.smoothness},
               {"nugget", config.gp.nugget},
               {"max_nugget", config.gp.max_nugget},
               {"theta_lower", config.gp.theta_lower},
               {"theta_upper", config.gp.theta_upper},
               {"multistarts", config.gp.multistarts},
               {"max_evaluations", config.gp.max_evaluations}};
  return out;
}

InverseResult solve(const InverseProblem& problem, const ExperimentConfig& config, const SolverSettings& s,
                    const std::vector<std::size_t>& dps, std::uint64_t seed) {
  switch (s.kind) {
    case SolverKind::msce: {
      MsceConfig c;
      c.plan = BudgetPlan::equal_split(s.n0, s.total, dps.size());
      c.dps = dps;
      c.alpha = s.alpha;
      c.candidate_points = s.candidates;
      c.extraction.delta = s.delta;
      c.extraction.delta_max = s.delta_max;
      c.extraction.points_per_dim = s.extraction_per_dim;
      c.gp = config.gp;
      return msce_solve(problem, c, seed);
    }
    case SolverKind::scalarization: {
      ScalarizationConfig c;
      c.n0 = s.n0;
      c.total = s.total;
      c.alpha = s.alpha;
      c.candidate_points = s.candidates;
      c.extraction_points_per_dim = s.extraction_per_dim;
      c.gp = config.gp;
      return scalarization_solve(problem, c, seed);
    }
    case SolverKind::history_matching: {
      HistoryMatchingConfig c;
      c.n0 = s.n0;
      c.waves = s.waves;
      c.cutoff = s.cutoff;
      c.max_clusters = s.clusters;
      c.test_points = s.candidates;
      c.dps = dps;
      c.extraction.delta = s.delta;
      c.extraction.delta_max = s.delta_max;
      c.extraction.alpha = s.alpha;
      c.extraction.points_per_dim = s.extraction_per_dim;
      c.gp = config.gp;
      return hm_solve(problem, c, seed);
    }
  }
  throw std::logic_error("unhandled solver kind");
}

std::string series_csv(const TimeSeries& target, const TimeSeries& fitted) {
  std::ostringstream out;
  out << "t,target,fitted\n";
  for (std::size_t i = 0; i < target.size(); ++i) {
    out << format_number(target.grid[i]) << ',' << format_number(target.values[i]) << ','
        << format_number(fitted.values[i]) << '\n';
  }
  return out.str();
}

std::string mse_curve_csv(const DpsResult& result) {
  std::ostringstream out;
  out << "k,mse\n";
  for (std::size_t k = 0; k < result.mse_curve.size(); ++k) out << k << ',' << format_number(result.mse_curve[k]) << '\n';
  return out.str();
}

}  // namespace

void write_atomically(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path temp = path;
  temp += ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + temp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + temp.string());
  }
  std::filesystem::rename(temp, path);
}

std::vector<std::size_t> resolve_dps(const ExperimentConfig& config, const TimeSeries& target, DpsResult* search) {
  DpsResult result = sequential_knot_search(target, config.dps.kmax, config.dps.rule);
  std::vector<std::size_t> dps = config.dps.positions.empty() ? result.dps() : config.dps.positions;
  if (search != nullptr) *search = std::move(result);
  return dps;
}

DpsResult dps_report(const ExperimentConfig& config, const std::filesystem::path& output) {
  const Target target = config.make_target();
  DpsResult result;
  resolve_dps(config, target.series, &result);
  write_atomically(output / "dps.json", result.to_json().dump(2) + "\n");
  write_atomically(output / "dps_mse_curve.csv", mse_curve_csv(result));
  return result;
}

void write_results_csv(std::ostream& out, const std::vector<RunRow>& rows) {
  out << "simulator,solver,replication,seed,n0,N,k,rmse,r2,normd,spread,sim_calls,wall_ms,status\n";
  for (const auto& row : rows) {
    out << row.simulator << ',' << row.solver << ',' << row.replication << ',' << row.seed << ',' << row.n0 << ','
        << row.total << ',' << row.k << ',';
    if (row.ok) {
      out << format_number(row.gof.rmse) << ',' << format_number(row.gof.r_squared) << ','
          << row.gof.norm_d_text() << ',' << csv_optional(row.gof.spread) << ',' << row.gof.simulator_calls << ','
          << fixed_ms(row.gof.runtime_ms) << ",ok\n";
    } else {
      out << ",,,," << row.gof.simulator_calls << ",,failed\n";
    }
  }
}

RunSummary run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  if (config.solvers.empty()) throw std::invalid_argument("config lists no solvers");
  if (config.spec.kind == SimulatorKind::external) {
    throw std::invalid_argument("an external target has no simulator to call");
  }
  RunSummary summary;
  summary.output = options.output.value_or(config.output);
  const Target target = config.make_target();
  summary.dps = resolve_dps(config, target.series, &summary.knot_search);

  InverseProblem base;
  base.spec = config.spec;
  base.target = target.series;
  SimulatorSpec clean = config.spec;
  clean.noise_sd = 0.0;

  const std::size_t per_rep = config.solvers.size();
  const std::size_t total_runs = config.replications * per_rep;
  summary.rows.resize(total_runs);
  std::mutex progress_mutex;
  std::atomic<std::size_t> next{0};

  auto work = [&] {
    for (std::size_t index = next++; index < total_runs; index = next++) {
      const std::size_t rep = index / per_rep;
      const SolverSettings& s = config.solvers[index % per_rep];
      const std::uint64_t seed = config.base_seed + rep;
      RunRow& row = summary.rows[index];
      row.simulator = std::string(to_string(config.spec.kind));
      row.solver = std::string(to_string(s.kind));
      row.replication = rep;
      row.seed = seed;
      row.n0 = s.n0 == 0 && s.kind == SolverKind::history_matching ? 10 * config.spec.dim : s.n0;
      row.k = s.kind == SolverKind::scalarization ? 0 : summary.dps.size();
      try {
        InverseProblem problem = base;
        problem.simulator = make_simulator(config.spec, seed);
        const InverseResult result = solve(problem, config, s, summary.dps, seed);
        const TimeSeries fitted = evaluate(clean, result.x_opt);
        row.gof = score(fitted, target.series);
        row.gof.spread = result.spread;
        row.gof.runtime_ms = result.wall_ms;
        row.gof.simulator_calls = result.simulator_calls;
        row.total = s.kind == SolverKind::history_matching ? result.simulator_calls : s.total;
        row.x_opt = result.x_opt;
        row.trail = result.trail;
        row.ok = true;
        if (options.artifacts) {
          nlohmann::json artifact;
          artifact["config"] = config_echo(config, s);
          artifact["replication"] = rep;
          artifact["seed"] = seed;
          artifact["dps"] = summary.dps;
          artifact["result"] = result.to_json();
          artifact["gof"] = row.gof.to_json();
          artifact["version"] = MSCE_VERSION;
          write_atomically(summary.output / "runs" / (run_stem(row) + ".json"), artifact.dump(2) + "\n");
          write_atomically(summary.output / "series" / (run_stem(row) + ".csv"), series_csv(target.series, fitted));
        }
      } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
      }
      if (options.progress != nullptr) {
        std::lock_guard lock(progress_mutex);
        *options.progress << row.solver << " replication " << rep << " (seed " << seed << "): "
                          << (row.ok ? "ok, rmse " + format_number(row.gof.rmse) : "FAILED: " + row.error) << '\n';
      }
    }
  };

  const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, total_runs));
  if (jobs == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < jobs; ++i) pool.emplace_back(work);
  }

  for (const auto& row : summary.rows) summary.failures += row.ok ? 0 : 1;
  std::ostringstream csv;
  write_results_csv(csv, summary.rows);
  write_atomically(summary.output / "results.csv", csv.str());
  if (options.artifacts) write_atomically(summary.output / "dps_mse_curve.csv", mse_curve_csv(summary.knot_search));
  return summary;
}

}  // namespace msce
