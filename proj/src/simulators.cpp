#include "msce/simulators.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace msce {
namespace {

constexpr double kPi = std::numbers::pi;

double easom(std::span<const double> x, double t) {
  const double a = x[0] - kPi * t;
  const double b = x[1] - kPi;
  return std::cos(x[0]) * std::cos(x[1]) * std::exp(-a * a - b * b);
}

double levy(std::span<const double> x, double t) {
  const double w1 = 1.0 + (x[0] - 1.0) / 4.0;
  const double w2 = 1.0 + (x[1] - 1.0) / 4.0;
  const double s_t = std::sin(kPi * t);
  const double shifted = t / 5.0 - 1.0;
  const double s_half = std::sin(0.5 * kPi * t + 1.0);
  const double time_factor = shifted * shifted * (1.0 + 10.0 * s_half * s_half);
  const double s_w1 = std::sin(kPi * w1 + 1.0);
  const double first = (w1 - 1.0) * (w1 - 1.0) * (1.0 + 10.0 * s_w1 * s_w1);
  const double s_w2 = std::sin(2.0 * kPi * w2);
  const double second = (w2 - 1.0) * (w2 - 1.0) * (1.0 + s_w2 * s_w2);
  return s_t * s_t + time_factor * first + second;
}

double harari(std::span<const double> x, double t) {
  return std::exp(3.0 * x[0] * t + t) * std::cos(6.0 * x[1] * t + 2.0 * t - 8.0 * x[2] - 6.0);
}

double bliznyuk(std::span<const double> x, double t) {
  const double mass = x[0];
  const double diffusion = x[1];
  const double location = x[2];
  const double delay = x[3];
  const double position = x[4];
  double value = mass / std::sqrt(diffusion * t) *
                 std::exp(-position * position / (4.0 * diffusion * t));
  if (delay < t) {
    const double lag = t - delay;
    const double offset = position - location;
    value += mass / std::sqrt(diffusion * lag) * std::exp(-offset * offset / (4.0 * diffusion * lag));
  }
  return value;
}

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

double parse_double(const std::string& field, const std::string& where) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = field.data() + field.size();
  if (!field.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw std::invalid_argument(where + ": cannot parse number '" + field + "'");
  }
  if (!std::isfinite(value)) throw std::invalid_argument(where + ": non-finite value '" + field + "'");
  return value;
}

}  // namespace

TimeGrid TimeGrid::equidistant(double start, double stop, std::size_t length) {
  if (length < 2) throw std::invalid_argument("time grid needs at least 2 points");
  if (!(stop > start) || !std::isfinite(start) || !std::isfinite(stop)) {
    throw std::invalid_argument("time grid needs finite start < stop");
  }
  std::vector<double> values(length);
  const double step = (stop - start) / static_cast<double>(length - 1);
  for (std::size_t i = 0; i < length; ++i) values[i] = start + step * static_cast<double>(i);
  values.back() = stop;
  return TimeGrid(std::move(values));
}

TimeGrid TimeGrid::from_values(std::vector<double> values, double spacing_tolerance) {
  if (values.size() < 2) throw std::invalid_argument("time grid needs at least 2 points");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw std::invalid_argument("time grid contains non-finite value");
    if (i > 0 && !(values[i] > values[i - 1])) {
      throw std::invalid_argument("time grid is not strictly increasing at position " +
                                  std::to_string(i + 1));
    }
  }
  const double mean_step = (values.back() - values.front()) / static_cast<double>(values.size() - 1);
  for (std::size_t i = 1; i < values.size(); ++i) {
    const double step = values[i] - values[i - 1];
    if (std::fabs(step - mean_step) > spacing_tolerance * mean_step) {
      throw std::invalid_argument("time grid is not equidistant at position " + std::to_string(i + 1));
    }
  }
  return TimeGrid(std::move(values));
}

void TimeSeries::validate() const {
  if (values.size() != grid.size()) {
    throw std::invalid_argument("series length " + std::to_string(values.size()) +
                                " does not match grid length " + std::to_string(grid.size()));
  }
  for (const double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("series contains non-finite value");
  }
}

std::string_view to_string(SimulatorKind kind) {
  switch (kind) {
    case SimulatorKind::easom: return "easom";
    case SimulatorKind::levy: return "levy";
    case SimulatorKind::harari: return "harari";
    case SimulatorKind::bliznyuk: return "bliznyuk";
    case SimulatorKind::external: return "external";
  }
  return "unknown";
}

SimulatorKind simulator_kind_from_string(std::string_view name) {
  for (const auto kind : {SimulatorKind::easom, SimulatorKind::levy, SimulatorKind::harari,
                          SimulatorKind::bliznyuk, SimulatorKind::external}) {
    if (to_string(kind) == name) return kind;
  }
  throw std::invalid_argument("unknown simulator '" + std::string(name) +
                              "' (expected easom, levy, harari, bliznyuk or external)");
}

SimulatorSpec SimulatorSpec::standard(SimulatorKind kind, double noise_sd) {
  SimulatorSpec spec;
  spec.kind = kind;
  spec.noise_sd = noise_sd;
  switch (kind) {
    case SimulatorKind::easom:
      spec.dim = 2;
      spec.box = {{0.0, 1.0}, {0.0, 1.0}};
      spec.grid = TimeGrid::equidistant(0.0, 1.0, 200);
      break;
    case SimulatorKind::levy:
      spec.dim = 2;
      spec.box = {{-10.0, 10.0}, {-10.0, 10.0}};
      spec.grid = TimeGrid::equidistant(0.0, 1.0, 200);
      break;
    case SimulatorKind::harari:
      spec.dim = 3;
      spec.box = {{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}};
      spec.grid = TimeGrid::equidistant(0.0, 1.0, 200);
      break;
    case SimulatorKind::bliznyuk:
      spec.dim = 5;
      spec.box = {{7.0, 13.0}, {0.02, 0.12}, {0.01, 3.0}, {30.01, 30.304}, {0.0, 3.0}};
      spec.grid = TimeGrid::equidistant(35.3, 95.0, 200);
      break;
    case SimulatorKind::external:
      throw std::invalid_argument("external simulators have no standard configuration");
  }
  return spec;
}

SimulatorSpec SimulatorSpec::external(TimeGrid grid, std::vector<Interval> box) {
  SimulatorSpec spec;
  spec.kind = SimulatorKind::external;
  spec.dim = box.size();
  spec.box = std::move(box);
  spec.grid = std::move(grid);
  spec.validate();
  return spec;
}

void SimulatorSpec::validate() const {
  static constexpr std::size_t kArity[] = {2, 2, 3, 5};
  if (kind != SimulatorKind::external && dim != kArity[static_cast<int>(kind)]) {
    throw std::invalid_argument(std::string(to_string(kind)) + " takes " +
                                std::to_string(kArity[static_cast<int>(kind)]) + " inputs, got " +
                                std::to_string(dim));
  }
  if (box.size() != dim) throw std::invalid_argument("input box has wrong dimension");
  for (const auto& [lo, hi] : box) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
      throw std::invalid_argument("input box bounds must be finite with lower < upper");
    }
  }
  if (grid.size() < 2) throw std::invalid_argument("simulator grid needs at least 2 points");
  if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) {
    throw std::invalid_argument("noise_sd must be finite and >= 0");
  }
}

std::vector<double> SimulatorSpec::to_native(std::span<const double> unit) const {
  if (unit.size() != dim) throw std::invalid_argument("input has wrong dimension");
  std::vector<double> native(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    const double value = box[k].lower + unit[k] * (box[k].upper - box[k].lower);
    native[k] = std::clamp(value, box[k].lower, box[k].upper);
  }
  return native;
}

std::vector<double> SimulatorSpec::to_unit(std::span<const double> native) const {
  if (native.size() != dim) throw std::invalid_argument("input has wrong dimension");
  std::vector<double> unit(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    unit[k] = (native[k] - box[k].lower) / (box[k].upper - box[k].lower);
  }
  return unit;
}

TimeSeries evaluate(const SimulatorSpec& spec, std::span<const double> x, Rng* noise) {
  if (x.size() != spec.dim) {
    throw std::invalid_argument("input has dimension " + std::to_string(x.size()) + ", expected " +
                                std::to_string(spec.dim));
  }
  for (std::size_t k = 0; k < spec.dim; ++k) {
    if (!(x[k] >= spec.box[k].lower && x[k] <= spec.box[k].upper)) {
      std::ostringstream msg;
      msg << "input x" << (k + 1) << " = " << x[k] << " outside [" << spec.box[k].lower << ", "
          << spec.box[k].upper << "]";
      throw std::domain_error(msg.str());
    }
  }
  double (*formula)(std::span<const double>, double) = nullptr;
  switch (spec.kind) {
    case SimulatorKind::easom: formula = &easom; break;
    case SimulatorKind::levy: formula = &levy; break;
    case SimulatorKind::harari: formula = &harari; break;
    case SimulatorKind::bliznyuk: formula = &bliznyuk; break;
    case SimulatorKind::external:
      throw std::invalid_argument("external target has no simulator formula to evaluate");
  }
  TimeSeries out{spec.grid, std::vector<double>(spec.grid.size())};
  for (std::size_t j = 0; j < spec.grid.size(); ++j) out.values[j] = formula(x, spec.grid[j]);
  if (spec.noise_sd > 0.0) {
    if (noise == nullptr) throw std::invalid_argument("noisy simulator evaluation needs an RNG");
    for (double& v : out.values) v += spec.noise_sd * noise->normal();
  }
  return out;
}

Target make_target(const SimulatorSpec& spec, std::span<const double> x0, std::uint64_t seed) {
  Rng noise = Rng::for_stream(seed, Stream::target_noise);
  Target target;
  target.series = evaluate(spec, x0, &noise);
  target.x0.assign(x0.begin(), x0.end());
  target.seed = seed;
  return target;
}

TimeSeries parse_target_csv(std::istream& in, const std::string& source_name) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<double> times;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    const std::string row = trim(line);
    if (row.empty()) continue;
    const std::string where = source_name + ":" + std::to_string(line_no);
    const auto comma = row.find(',');
    if (comma == std::string::npos || row.find(',', comma + 1) != std::string::npos) {
      throw std::invalid_argument(where + ": expected exactly two comma-separated columns");
    }
    const std::string first = trim(std::string_view(row).substr(0, comma));
    const std::string second = trim(std::string_view(row).substr(comma + 1));
    if (!have_header) {
      if (first != "t" || second != "value") {
        throw std::invalid_argument(where + ": expected header 't,value'");
      }
      have_header = true;
      continue;
    }
    times.push_back(parse_double(first, where));
    values.push_back(parse_double(second, where));
  }
  if (!have_header) throw std::invalid_argument(source_name + ": empty target file");
  TimeSeries series{TimeGrid::from_values(std::move(times), 1e-6), std::move(values)};
  series.validate();
  return series;
}

TimeSeries load_external_target(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open target file " + path.string());
  return parse_target_csv(in, path.string());
}

void write_series_csv(std::ostream& out, const TimeSeries& series) {
  out << "t,value\n";
  out << std::setprecision(17);
  for (std::size_t j = 0; j < series.size(); ++j) {
    out << series.grid[j] << ',' << series.values[j] << '\n';
  }
}

}  // namespace msce
