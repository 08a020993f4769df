#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "msce/dps.hpp"
#include "msce/gp.hpp"
#include "msce/metrics.hpp"
#include "msce/simulators.hpp"
#include "msce/solvers.hpp"

namespace msce {

/// Schema violations, one "source:line:column: message" entry each.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> diagnostics);
  const std::vector<std::string>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<std::string> diagnostics_;
};

enum class SolverKind { msce, scalarization, history_matching };
std::string_view to_string(SolverKind kind);

struct SolverSettings {
  SolverKind kind = SolverKind::msce;
  std::size_t n0 = 0;
  std::size_t total = 0;
  double alpha = 0.67;
  double delta = 1e-5;
  double delta_max = 1e-2;
  std::size_t candidates = 5000;
  std::size_t extraction_per_dim = 10000;
  double cutoff = 3.0;
  std::size_t waves = 3;
  std::size_t clusters = 10;
};

struct DpsSettings {
  /// Empty: choose by sequential knot search with the elbow rule.
  std::vector<std::size_t> positions;
  std::size_t kmax = 10;
  ElbowRule rule = ElbowRule::log_gain;
};

struct ExperimentConfig {
  std::string name;
  SimulatorSpec spec;
  /// Native-scale generating input; absent for a file target.
  std::optional<std::vector<double>> x0;
  std::uint64_t target_seed = 0;
  std::optional<std::filesystem::path> target_file;
  DpsSettings dps;
  std::vector<SolverSettings> solvers;
  std::size_t replications = 1;
  std::uint64_t base_seed = 0;
  /// Set when INVERSE_TS_SEED replaced the configured seed.
  bool seed_from_environment = false;
  std::filesystem::path output = "results";
  GpConfig gp;

  Target make_target() const;
};

/// Parses YAML text. Relative paths resolve against `base_dir`.
ExperimentConfig parse_config(const std::string& text, const std::string& source_name,
                              const std::filesystem::path& base_dir = {});
/// Reads and parses a config file, then applies INVERSE_TS_SEED.
ExperimentConfig load_config(const std::filesystem::path& path);

struct RunOptions {
  std::size_t jobs = 1;
  std::optional<std::filesystem::path> output;
  /// Write per-run JSON and plot CSVs next to results.csv.
  bool artifacts = true;
  /// Progress lines on this stream (nullptr: silent).
  std::ostream* progress = nullptr;
};

struct RunRow {
  std::string simulator;
  std::string solver;
  std::size_t replication = 0;
  std::uint64_t seed = 0;
  std::size_t n0 = 0;
  std::size_t total = 0;
  std::size_t k = 0;
  GofReport gof;
  bool ok = false;
  std::string error;
  std::vector<double> x_opt;
  std::vector<AuditEntry> trail;
};

struct RunSummary {
  std::vector<RunRow> rows;
  std::size_t failures = 0;
  std::vector<std::size_t> dps;
  DpsResult knot_search;
  std::filesystem::path output;
};

/// Runs every (replication, solver) pair; rows come back ordered by
/// replication, then by solver order in the config.
RunSummary run_experiment(const ExperimentConfig& config, const RunOptions& options);

void write_results_csv(std::ostream& out, const std::vector<RunRow>& rows);

/// Writes `content` to `path` through a temporary file and rename.
void write_atomically(const std::filesystem::path& path, const std::string& content);

/// Sequential knot search on the config's target; writes dps.json and
/// dps_mse_curve.csv into `output`.
DpsResult dps_report(const ExperimentConfig& config, const std::filesystem::path& output);

/// The DPS used by the solvers: explicit positions or the elbow-selected knots.
std::vector<std::size_t> resolve_dps(const ExperimentConfig& config, const TimeSeries& target,
                                     DpsResult* search = nullptr);

}  // namespace msce
