#include <CLI11.hpp>

#include <iostream>

#include "msce/experiment.hpp"
#include "msce/kernels.hpp"

namespace {

constexpr int kConfigError = 2;

int report_config_error(const msce::ConfigError& e) {
  for (const auto& line : e.diagnostics()) std::cerr << line << '\n';
  return kConfigError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inverse problems for time-series simulators: MSCE, scalarization and history matching"};
  app.set_version_flag("--version", std::string("msce ") + MSCE_VERSION + " (" +
                                        std::string(msce::kernels::isa_name(msce::kernels::active_isa())) +
                                        " kernels)");
  std::string validate_path;
  app.add_option("--validate", validate_path, "Check a config file and exit")->check(CLI::ExistingFile);

  auto* run = app.add_subcommand("run", "Run every configured solver over all replications");
  std::string run_config;
  std::size_t jobs = 1;
  std::string out_dir;
  bool quiet = false;
  run->add_option("config", run_config, "Experiment config (YAML)")->required()->check(CLI::ExistingFile);
  run->add_option("--jobs,-j", jobs, "Replications run concurrently")->check(CLI::PositiveNumber);
  run->add_option("--out,-o", out_dir, "Output directory (overrides the config)");
  run->add_flag("--quiet,-q", quiet, "No per-run progress lines");

  auto* dps = app.add_subcommand("dps", "Sequential knot search on the config's target");
  std::string dps_config;
  std::string dps_out;
  dps->add_option("config", dps_config, "Experiment config (YAML)")->required()->check(CLI::ExistingFile);
  dps->add_option("--out,-o", dps_out, "Output directory (overrides the config)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!validate_path.empty()) {
      const msce::ExperimentConfig config = msce::load_config(validate_path);
      std::cout << validate_path << ": ok (" << config.solvers.size() << " solvers, " << config.replications
                << " replications)\n";
      return 0;
    }
    if (*run) {
      const msce::ExperimentConfig config = msce::load_config(run_config);
      msce::RunOptions options;
      options.jobs = jobs;
      if (!out_dir.empty()) options.output = out_dir;
      if (!quiet) options.progress = &std::cerr;
      const msce::RunSummary summary = msce::run_experiment(config, options);
      std::cerr << "wrote " << (summary.output / "results.csv").string() << " (" << summary.rows.size() - summary.failures
                << " ok, " << summary.failures << " failed)\n";
      return summary.failures == summary.rows.size() ? 1 : 0;
    }
    if (*dps) {
      const msce::ExperimentConfig config = msce::load_config(dps_config);
      const std::filesystem::path out = dps_out.empty() ? config.output : std::filesystem::path(dps_out);
      const msce::DpsResult result = msce::dps_report(config, out);
      std::cout << "DPS:";
      for (const std::size_t p : result.dps()) std::cout << ' ' << p;
      std::cout << "  (k* = " << result.selected_k << ", " << result.fit_count << " fits)\n";
      return 0;
    }
    std::cout << app.help();
    return 0;
  } catch (const msce::ConfigError& e) {
    return report_config_error(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
