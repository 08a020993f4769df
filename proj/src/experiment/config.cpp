#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "msce/experiment.hpp"

namespace msce {
namespace {

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& line : lines) {
    if (!out.empty()) out += '\n';
    out += line;
  }
  return out;
}

// Collects schema errors with source positions instead of stopping at the first.
class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  void error(const YAML::Node& node, const std::string& message) {
    const YAML::Mark mark = node.Mark();
    std::ostringstream line;
    line << source_;
    if (!mark.is_null()) line << ':' << mark.line + 1 << ':' << mark.column + 1;
    line << ": " << message;
    errors_.push_back(line.str());
  }

  void error_at_top(const std::string& message) { errors_.push_back(source_ + ": " + message); }

  void allow_keys(const YAML::Node& map, std::initializer_list<const char*> keys, const std::string& where) {
    if (!map.IsMap()) {
      error(map, where + " must be a mapping");
      return;
    }
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& entry : map) {
      const auto key = entry.first.as<std::string>();
      if (!allowed.count(key)) error(entry.first, "unknown key '" + key + "' in " + where);
    }
  }

  template <typename T>
  std::optional<T> scalar(const YAML::Node& map, const char* key) {
    const YAML::Node node = map[key];
    if (!node) return std::nullopt;
    if (!node.IsScalar()) {
      error(node, std::string("'") + key + "' must be a scalar");
      return std::nullopt;
    }
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      error(node, std::string("'") + key + "' has an invalid value '" + node.Scalar() + "'");
      return std::nullopt;
    }
  }

  std::optional<std::size_t> count(const YAML::Node& map, const char* key) {
    const YAML::Node node = map[key];
    if (!node) return std::nullopt;
    if (node.IsScalar() && !node.Scalar().empty() && node.Scalar()[0] == '-') {
      error(node, std::string("'") + key + "' must be a non-negative integer");
      return std::nullopt;
    }
    return scalar<std::size_t>(map, key);
  }

  template <typename T>
  std::optional<std::vector<T>> list(const YAML::Node& map, const char* key) {
    const YAML::Node node = map[key];
    if (!node) return std::nullopt;
    if (!node.IsSequence()) {
      error(node, std::string("'") + key + "' must be a list");
      return std::nullopt;
    }
    std::vector<T> out;
    for (const auto& item : node) {
      try {
        out.push_back(item.as<T>());
      } catch (const YAML::Exception&) {
        error(item, std::string("invalid entry in '") + key + "'");
        return std::nullopt;
      }
    }
    return out;
  }

  bool ok() const { return errors_.empty(); }
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::string source_;
  std::vector<std::string> errors_;
};

std::size_t expected_dim(SimulatorKind kind) {
  switch (kind) {
    case SimulatorKind::easom:
    case SimulatorKind::levy: return 2;
    case SimulatorKind::harari: return 3;
    case SimulatorKind::bliznyuk: return 5;
    case SimulatorKind::external: return 0;
  }
  return 0;
}

SolverKind solver_kind_from_string(const std::string& name) {
  if (name == "msce") return SolverKind::msce;
  if (name == "scalarization") return SolverKind::scalarization;
  if (name == "history_matching" || name == "hm") return SolverKind::history_matching;
  throw std::invalid_argument("unknown solver '" + name + "'");
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> diagnostics)
    : std::runtime_error(join_lines(diagnostics)), diagnostics_(std::move(diagnostics)) {}

std::string_view to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::msce: return "msce";
    case SolverKind::scalarization: return "scalarization";
    case SolverKind::history_matching: return "history_matching";
  }
  return "unknown";
}

Target ExperimentConfig::make_target() const {
  if (target_file) {
    Target target;
    target.series = load_external_target(*target_file);
    return target;
  }
  return msce::make_target(spec, *x0, target_seed);
}

ExperimentConfig parse_config(const std::string& text, const std::string& source_name,
                              const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    std::ostringstream line;
    line << source_name << ':' << e.mark.line + 1 << ':' << e.mark.column + 1 << ": " << e.msg;
    throw ConfigError({line.str()});
  }
  Reader r(source_name);
  if (!root.IsMap()) {
    r.error_at_top("top level must be a mapping");
    throw ConfigError(r.errors());
  }
  r.allow_keys(root, {"name", "simulator", "target", "dps", "solvers", "replications", "seed", "output", "gp"},
               "the top level");

  ExperimentConfig config;
  config.name = r.scalar<std::string>(root, "name").value_or("experiment");

  // Simulator.
  const YAML::Node sim = root["simulator"];
  SimulatorKind kind = SimulatorKind::easom;
  double noise_sd = 0.0;
  std::vector<Interval> box;
  if (!sim) {
    r.error_at_top("missing required section 'simulator'");
  } else {
    r.allow_keys(sim, {"kind", "noise_sd", "box"}, "'simulator'");
    if (const auto name = r.scalar<std::string>(sim, "kind")) {
      try {
        kind = simulator_kind_from_string(*name);
      } catch (const std::exception& e) {
        r.error(sim["kind"], e.what());
      }
    } else {
      r.error(sim, "'simulator' needs 'kind'");
    }
    noise_sd = r.scalar<double>(sim, "noise_sd").value_or(0.0);
    if (!(noise_sd >= 0.0)) r.error(sim["noise_sd"], "'noise_sd' must be >= 0");
    if (const YAML::Node b = sim["box"]) {
      if (!b.IsSequence()) {
        r.error(b, "'box' must be a list of [lower, upper] pairs");
      } else {
        for (const auto& pair : b) {
          if (!pair.IsSequence() || pair.size() != 2) {
            r.error(pair, "box entries must be [lower, upper]");
            continue;
          }
          try {
            Interval iv{pair[0].as<double>(), pair[1].as<double>()};
            if (!(iv.lower < iv.upper)) r.error(pair, "box entry needs lower < upper");
            box.push_back(iv);
          } catch (const YAML::Exception&) {
            r.error(pair, "box bounds must be numbers");
          }
        }
      }
    }
  }

  // Target.
  const YAML::Node target = root["target"];
  if (!target) {
    r.error_at_top("missing required section 'target'");
  } else {
    r.allow_keys(target, {"x0", "seed", "file"}, "'target'");
    config.x0 = r.list<double>(target, "x0");
    config.target_seed = r.scalar<std::uint64_t>(target, "seed").value_or(0);
    if (const auto file = r.scalar<std::string>(target, "file")) {
      std::filesystem::path path(*file);
      config.target_file = path.is_relative() ? base_dir / path : path;
    }
    if (config.x0.has_value() == config.target_file.has_value()) {
      r.error(target, "'target' needs exactly one of 'x0' or 'file'");
    }
  }

  if (kind == SimulatorKind::external) {
    if (!config.target_file) r.error(sim, "an external simulator needs 'target.file'");
    if (box.empty()) r.error(sim, "an external simulator needs 'box'");
  } else if (config.target_file) {
    r.error(target, "'target.file' is only valid with the external simulator");
  }

  if (r.ok()) {
    try {
      if (kind == SimulatorKind::external) {
        config.spec = SimulatorSpec::external(load_external_target(*config.target_file).grid, box);
      } else {
        config.spec = SimulatorSpec::standard(kind, noise_sd);
        if (!box.empty()) {
          if (box.size() != config.spec.dim) {
            r.error(sim["box"], "'box' needs " + std::to_string(config.spec.dim) + " entries");
          } else {
            config.spec.box = box;
          }
        }
      }
      if (config.x0 && config.x0->size() != expected_dim(kind)) {
        r.error(target["x0"], "'x0' needs " + std::to_string(expected_dim(kind)) + " entries");
      } else if (config.x0) {
        for (std::size_t k = 0; k < config.x0->size(); ++k) {
          const double v = (*config.x0)[k];
          if (!(v >= config.spec.box[k].lower && v <= config.spec.box[k].upper)) {
            r.error(target["x0"], "'x0' entry " + std::to_string(k + 1) + " lies outside the input box");
          }
        }
      }
    } catch (const std::exception& e) {
      r.error(target ? target : root, e.what());
    }
  }

  // DPS.
  if (const YAML::Node dps = root["dps"]) {
    r.allow_keys(dps, {"positions", "kmax", "rule"}, "'dps'");
    if (auto positions = r.list<std::size_t>(dps, "positions")) config.dps.positions = std::move(*positions);
    config.dps.kmax = r.count(dps, "kmax").value_or(config.dps.kmax);
    if (const auto rule = r.scalar<std::string>(dps, "rule")) {
      try {
        config.dps.rule = elbow_rule_from_string(*rule);
      } catch (const std::exception& e) {
        r.error(dps["rule"], e.what());
      }
    }
    const std::size_t length = config.spec.grid.size();
    if (length > 0) {
      for (const std::size_t p : config.dps.positions) {
        if (p < 1 || p > length) {
          r.error(dps["positions"], "DPS position " + std::to_string(p) + " outside 1.." + std::to_string(length));
        }
      }
      if (config.dps.kmax < 1 || 2 * config.dps.kmax >= length) {
        r.error(dps, "'kmax' must satisfy 1 <= kmax < L/2");
      }
    }
  }

  // Solvers.
  if (const YAML::Node solvers = root["solvers"]) {
    if (!solvers.IsSequence()) {
      r.error(solvers, "'solvers' must be a list");
    } else {
      for (const auto& node : solvers) {
        r.allow_keys(node,
                     {"kind", "n0", "N", "alpha", "delta", "delta_max", "candidates", "extraction_per_dim",
                      "cutoff", "waves", "clusters"},
                     "a solver entry");
        if (!node.IsMap()) continue;
        SolverSettings s;
        const auto name = r.scalar<std::string>(node, "kind");
        if (!name) {
          r.error(node, "solver entry needs 'kind'");
          continue;
        }
        try {
          s.kind = solver_kind_from_string(*name);
        } catch (const std::exception& e) {
          r.error(node["kind"], e.what());
          continue;
        }
        s.n0 = r.count(node, "n0").value_or(0);
        s.total = r.count(node, "N").value_or(0);
        s.alpha = r.scalar<double>(node, "alpha").value_or(s.alpha);
        s.delta = r.scalar<double>(node, "delta").value_or(s.delta);
        s.delta_max = r.scalar<double>(node, "delta_max").value_or(s.delta_max);
        s.candidates = r.count(node, "candidates").value_or(s.candidates);
        s.extraction_per_dim = r.count(node, "extraction_per_dim").value_or(s.extraction_per_dim);
        s.cutoff = r.scalar<double>(node, "cutoff").value_or(s.cutoff);
        s.waves = r.count(node, "waves").value_or(s.waves);
        s.clusters = r.count(node, "clusters").value_or(s.clusters);
        if (s.kind != SolverKind::history_matching) {
          if (s.n0 == 0 || s.total <= s.n0) r.error(node, "solver needs 1 <= n0 < N");
        } else if (s.waves < 1) {
          r.error(node, "'waves' must be >= 1");
        }
        if (!(s.alpha > 0.0)) r.error(node, "'alpha' must be > 0");
        if (!(s.delta > 0.0) || !(s.delta_max >= s.delta)) r.error(node, "need 0 < delta <= delta_max");
        if (!(s.cutoff > 0.0)) r.error(node, "'cutoff' must be > 0");
        if (s.candidates == 0 || s.extraction_per_dim == 0 || s.clusters == 0) {
          r.error(node, "'candidates', 'extraction_per_dim' and 'clusters' must be >= 1");
        }
        config.solvers.push_back(s);
      }
      if (kind == SimulatorKind::external && !config.solvers.empty()) {
        r.error(solvers, "an external target has no simulator to call; only 'dps' is supported");
      }
    }
  }

  if (const auto reps = r.count(root, "replications")) {
    config.replications = *reps;
    if (*reps < 1) r.error(root["replications"], "'replications' must be >= 1");
  }
  config.base_seed = r.scalar<std::uint64_t>(root, "seed").value_or(0);
  if (const auto out = r.scalar<std::string>(root, "output")) {
    std::filesystem::path path(*out);
    config.output = path.is_relative() ? base_dir / path : path;
  } else {
    config.output = base_dir / "results";
  }

  if (const YAML::Node gp = root["gp"]) {
    r.allow_keys(gp, {"smoothness", "nugget", "max_nugget", "theta_lower", "theta_upper", "multistarts",
                      "max_evaluations"},
                 "'gp'");
    config.gp.smoothness = r.scalar<double>(gp, "smoothness").value_or(config.gp.smoothness);
    config.gp.nugget = r.scalar<double>(gp, "nugget").value_or(config.gp.nugget);
    config.gp.max_nugget = r.scalar<double>(gp, "max_nugget").value_or(config.gp.max_nugget);
    config.gp.theta_lower = r.scalar<double>(gp, "theta_lower").value_or(config.gp.theta_lower);
    config.gp.theta_upper = r.scalar<double>(gp, "theta_upper").value_or(config.gp.theta_upper);
    config.gp.multistarts = r.count(gp, "multistarts").value_or(config.gp.multistarts);
    config.gp.max_evaluations = r.count(gp, "max_evaluations").value_or(config.gp.max_evaluations);
    try {
      config.gp.validate(config.spec.dim == 0 ? 1 : config.spec.dim);
    } catch (const std::exception& e) {
      r.error(gp, e.what());
    }
  }

  if (!r.ok()) throw ConfigError(r.errors());
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError({path.string() + ": cannot open config file"});
  std::ostringstream text;
  text << in.rdbuf();
  ExperimentConfig config = parse_config(text.str(), path.string(), path.parent_path());
  if (const char* env = std::getenv("INVERSE_TS_SEED"); env != nullptr && *env != '\0') {
    std::uint64_t seed = 0;
    const char* end = env + std::char_traits<char>::length(env);
    const auto [ptr, ec] = std::from_chars(env, end, seed);
    if (ec != std::errc() || ptr != end) throw ConfigError({std::string("INVERSE_TS_SEED is not an unsigned integer: ") + env});
    config.base_seed = seed;
    config.seed_from_environment = true;
  }
  return config;
}

}  // namespace msce
