#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "relid/csv.hpp"
#include "relid/errors.hpp"
#include "relid/identifier.hpp"
#include "relid/metrics.hpp"
#include "relid/plant.hpp"
#include "relid/snapshot.hpp"

namespace relid {

/// Shape of the current-reference profile driving the plant.
enum class ProfileKind { Sinusoid, Steps, Constant, SpeedStep };

/// One experiment: plant profile, noise, identifier parameters, outputs.
/// Everything needed to regenerate a run from scratch; a fixed seed makes
/// the artifacts byte-identical across executions.
struct ExperimentSpec {
  std::string scenario = "run";

  // plant profile
  ProfileKind profile = ProfileKind::Sinusoid;
  double amplitude = 10.0;  ///< sinusoid amplitude or constant value (A)
  double frequency = 0.5;   ///< sinusoid frequency (Hz)
  std::vector<std::pair<double, double>> steps;       ///< Steps profile knots
  std::vector<std::pair<double, double>> load_steps;  ///< load torque knots (N m)
  double duration = 10.0;                             ///< s
  double sim_dt = 1e-4;                               ///< plant integration step (s)
  MotorModel model = MotorModel::IdealCurrent;
  double current_kp = 1000.0;

  // SpeedStep closed loop
  double speed_ref = 100.0;  ///< target speed (rad/s)
  double speed_kp = 2.0;     ///< proportional speed gain (A per rad/s)
  double iq_limit = 10.0;    ///< current reference clamp (A)

  // noise; nominal 0 selects an automatic value (profile magnitude for u,
  // peak clean speed for y)
  double u_noise_fraction = 0.0;
  double y_noise_fraction = 0.0;
  double u_noise_nominal = 0.0;
  double y_noise_nominal = 0.0;

  IdentifierConfig ident;

  std::uint64_t seed = 1;
  std::string out_dir = ".";

  MotorParams motor;

  void validate() const {
    ident.validate();
    motor.validate();
    if (scenario.empty()) throw ConfigError("ExperimentSpec: scenario id must not be empty");
    if (!(duration > 0.0)) throw ConfigError("ExperimentSpec: duration must be positive");
    if (!(sim_dt > 0.0)) throw ConfigError("ExperimentSpec: sim_dt must be positive");
    if (u_noise_fraction < 0.0 || y_noise_fraction < 0.0) {
      throw ConfigError("ExperimentSpec: noise fractions must be non-negative");
    }
    const double stride = ident.dt / sim_dt;
    if (std::abs(stride - std::round(stride)) > 1e-9 * stride || stride < 1.0 - 1e-9) {
      throw ConfigError("ExperimentSpec: ident_dt must be an integer multiple of sim_dt");
    }
  }

  int output_stride() const { return static_cast<int>(std::llround(ident.dt / sim_dt)); }
};

/// Outcome of a run: the logged cycles, their error summary, and where the
/// artifacts were written. For synthetic data the clean (noise-free) speed
/// is kept alongside so predictions can be scored against it.
struct RunReport {
  std::string scenario;
  bool synthetic = false;
  std::uint64_t seed = 0;
  std::vector<TraceRow> trace;
  Metrics metrics;
  std::optional<double> rmse_vs_clean;
  std::optional<double> peak_clean_abs_y;
  std::vector<double> y_clean;
  std::string trace_path;
  std::string snapshot_path;
  std::string report_path;
};

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
  // splitmix64 round over the tagged seed
  std::uint64_t z = seed ^ (tag * 0x9E3779B97F4A7C15ULL);
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline Schedule load_schedule(const ExperimentSpec& spec) {
  if (spec.load_steps.empty()) return Schedule::constant(spec.motor.load_torque);
  return Schedule::steps(spec.load_steps);
}

}  // namespace detail

/// Clean plant trajectory at identifier cadence plus the noisy stream the
/// identifier will actually see.
struct GeneratedStream {
  std::vector<Sample> noisy;
  std::vector<double> y_clean;
  double peak_clean_abs_y = 0.0;
};

inline GeneratedStream generate_stream(const ExperimentSpec& spec) {
  spec.validate();
  SimOptions opt;
  opt.dt = spec.sim_dt;
  opt.duration = spec.duration;
  opt.output_stride = spec.output_stride();
  opt.model = spec.model;
  opt.current_kp = spec.current_kp;

  const Schedule load = detail::load_schedule(spec);
  std::vector<Sample> clean;
  double u_auto_nominal = spec.amplitude;
  switch (spec.profile) {
    case ProfileKind::Sinusoid:
      clean = simulate(Schedule::sinusoid(spec.amplitude, spec.frequency), load, spec.motor, opt);
      break;
    case ProfileKind::Constant:
      clean = simulate(Schedule::constant(spec.amplitude), load, spec.motor, opt);
      break;
    case ProfileKind::Steps: {
      clean = simulate(Schedule::steps(spec.steps), load, spec.motor, opt);
      u_auto_nominal = 0.0;
      for (const auto& [t, v] : spec.steps) u_auto_nominal = std::max(u_auto_nominal, std::abs(v));
      break;
    }
    case ProfileKind::SpeedStep: {
      opt.model = MotorModel::FullDq;
      clean = simulate_speed_controlled(Schedule::constant(spec.speed_ref), spec.speed_kp,
                                        spec.iq_limit, load, spec.motor, opt);
      u_auto_nominal = spec.iq_limit;
      break;
    }
  }

  GeneratedStream out;
  out.y_clean.reserve(clean.size());
  for (const Sample& s : clean) {
    out.y_clean.push_back(s.y);
    out.peak_clean_abs_y = std::max(out.peak_clean_abs_y, std::abs(s.y));
  }

  std::vector<double> u_col(clean.size()), y_col(clean.size());
  for (std::size_t i = 0; i < clean.size(); ++i) {
    u_col[i] = clean[i].u;
    y_col[i] = clean[i].y;
  }
  const double u_nom = spec.u_noise_nominal > 0.0 ? spec.u_noise_nominal : u_auto_nominal;
  const double y_nom = spec.y_noise_nominal > 0.0 ? spec.y_noise_nominal : out.peak_clean_abs_y;
  u_col = add_noise(std::move(u_col), spec.u_noise_fraction, u_nom,
                    detail::mix_seed(spec.seed, 0x75));
  y_col = add_noise(std::move(y_col), spec.y_noise_fraction, y_nom,
                    detail::mix_seed(spec.seed, 0x79));

  out.noisy.resize(clean.size());
  for (std::size_t i = 0; i < clean.size(); ++i) {
    out.noisy[i] = {clean[i].t, u_col[i], y_col[i]};
  }
  return out;
}

namespace detail {

inline nlohmann::json report_to_json(const RunReport& r) {
  nlohmann::json j{{"scenario", r.scenario},
                   {"synthetic", r.synthetic},
                   {"seed", r.seed},
                   {"samples", r.metrics.samples},
                   {"trace_file", r.trace_path},
                   {"snapshot_file", r.snapshot_path}};
  if (r.metrics.samples > 0) {
    j["rmse"] = r.metrics.rmse;
    j["quarter_rmse"] = r.metrics.quarter_rmse;
    j["max_abs_error"] = r.metrics.max_abs_error;
  }
  if (r.rmse_vs_clean) j["rmse_vs_clean"] = *r.rmse_vs_clean;
  if (r.peak_clean_abs_y) j["peak_clean_abs_y"] = *r.peak_clean_abs_y;
  return j;
}

/// Drives the identifier over a sample stream and writes trace, snapshot
/// and report files. y_clean, when given, must parallel the samples.
inline RunReport identify_over(const ExperimentSpec& spec, std::span<const Sample> samples,
                               const std::vector<double>* y_clean, double peak_clean_abs_y) {
  namespace fs = std::filesystem;
  fs::create_directories(spec.out_dir);
  RunReport report;
  report.scenario = spec.scenario;
  report.seed = spec.seed;
  report.synthetic = y_clean != nullptr;
  report.trace_path = (fs::path(spec.out_dir) / (spec.scenario + ".trace.csv")).string();
  report.report_path = (fs::path(spec.out_dir) / (spec.scenario + ".report.json")).string();

  if (samples.empty()) {
    // Header-only trace, minimal report, no snapshot.
    write_trace(report.trace_path, {});
    std::ofstream out(report.report_path, std::ios::binary);
    out << report_to_json(report).dump(2) << "\n";
    return report;
  }

  report.snapshot_path = (fs::path(spec.out_dir) / (spec.scenario + ".snapshot.json")).string();

  Identifier id(spec.ident);
  report.trace.reserve(samples.size());
  for (const Sample& s : samples) {
    const StepResult r = id.step(s.u, s.y);
    report.trace.push_back({s.t, s.u, s.y, r.y_hat, r.error});
  }

  report.metrics = compute_metrics(report.trace);
  if (y_clean) {
    report.y_clean = *y_clean;
    report.peak_clean_abs_y = peak_clean_abs_y;
    double sum = 0.0;
    for (std::size_t i = 0; i < report.trace.size(); ++i) {
      const double d = report.trace[i].y_hat - (*y_clean)[i];
      sum += d * d;
    }
    report.rmse_vs_clean = std::sqrt(sum / static_cast<double>(report.trace.size()));
  }

  write_trace(report.trace_path, report.trace);
  save_snapshot(report.snapshot_path, id.snapshot());
  std::ofstream out(report.report_path, std::ios::binary);
  if (!out) throw ParseError("cannot open report file for writing: " + report.report_path);
  out << report_to_json(report).dump(2) << "\n";
  return report;
}

}  // namespace detail

/// Generates the scenario's data stream and identifies over it.
inline RunReport run_experiment(const ExperimentSpec& spec) {
  const GeneratedStream stream = generate_stream(spec);
  return detail::identify_over(spec, stream.noisy, &stream.y_clean, stream.peak_clean_abs_y);
}

/// Identifies over an externally loaded stream. The identifier's sampling
/// period follows the series' inferred spacing when available.
inline RunReport run_replay(ExperimentSpec spec, const Series& series) {
  if (series.dt > 0.0) spec.ident.dt = series.dt;
  spec.ident.validate();
  return detail::identify_over(spec, series.samples, nullptr, 0.0);
}

// ---------------------------------------------------------------------------
// Declarative spec files: flat "key = value" lines, '#' comments.

namespace detail {

inline std::vector<std::pair<double, double>> parse_knots(std::string_view text,
                                                          const std::string& context) {
  std::vector<std::pair<double, double>> knots;
  std::size_t start = 0;
  const std::string s(text);
  while (start < s.size()) {
    std::size_t end = s.find(',', start);
    if (end == std::string::npos) end = s.size();
    const std::string_view item = trim(std::string_view(s).substr(start, end - start));
    if (!item.empty()) {
      const std::size_t colon = item.find(':');
      if (colon == std::string_view::npos) {
        throw ParseError(context + ": expected time:value pairs, got '" + std::string(item) + "'");
      }
      const double t = parse_number(trim(item.substr(0, colon)), context, 0);
      const double v = parse_number(trim(item.substr(colon + 1)), context, 0);
      knots.emplace_back(t, v);
    }
    start = end + 1;
  }
  if (knots.empty()) throw ParseError(context + ": empty step list");
  return knots;
}

}  // namespace detail

/// Applies one key/value setting to a spec. Shared by the file parser and
/// command-line overrides; unknown keys are rejected.
inline void apply_setting(ExperimentSpec& spec, std::string_view key, std::string_view value,
                          const std::string& context) {
  const std::string val(value);
  auto num = [&] { return detail::parse_number(value, context, 0); };
  auto integer = [&] { return static_cast<int>(std::llround(detail::parse_number(value, context, 0))); };

  if (key == "scenario") spec.scenario = val;
  else if (key == "profile") {
    if (val == "sinusoid") spec.profile = ProfileKind::Sinusoid;
    else if (val == "steps") spec.profile = ProfileKind::Steps;
    else if (val == "constant") spec.profile = ProfileKind::Constant;
    else if (val == "speed_step") spec.profile = ProfileKind::SpeedStep;
    else throw ParseError(context + ": unknown profile '" + val + "'");
  } else if (key == "amplitude") spec.amplitude = num();
  else if (key == "frequency") spec.frequency = num();
  else if (key == "steps") spec.steps = detail::parse_knots(value, context);
  else if (key == "load_steps") spec.load_steps = detail::parse_knots(value, context);
  else if (key == "duration") spec.duration = num();
  else if (key == "sim_dt") spec.sim_dt = num();
  else if (key == "model") {
    if (val == "ideal_current") spec.model = MotorModel::IdealCurrent;
    else if (val == "full_dq") spec.model = MotorModel::FullDq;
    else throw ParseError(context + ": unknown model '" + val + "'");
  } else if (key == "current_kp") spec.current_kp = num();
  else if (key == "speed_ref") spec.speed_ref = num();
  else if (key == "speed_kp") spec.speed_kp = num();
  else if (key == "iq_limit") spec.iq_limit = num();
  else if (key == "u_noise_fraction") spec.u_noise_fraction = num();
  else if (key == "y_noise_fraction") spec.y_noise_fraction = num();
  else if (key == "u_noise_nominal") spec.u_noise_nominal = num();
  else if (key == "y_noise_nominal") spec.y_noise_nominal = num();
  else if (key == "alpha") spec.ident.alpha = num();
  else if (key == "beta") spec.ident.beta = num();
  else if (key == "gamma") spec.ident.gamma = num();
  else if (key == "filter_order") spec.ident.filter_order = integer();
  else if (key == "n_sets") spec.ident.n_sets = integer();
  else if (key == "u_init_limit") spec.ident.u_init_limit = num();
  else if (key == "y_init_limit") spec.ident.y_init_limit = num();
  else if (key == "ident_dt") spec.ident.dt = num();
  else if (key == "integral_clamp") spec.ident.integral_clamp = num();
  else if (key == "seed") spec.seed = static_cast<std::uint64_t>(std::llround(num()));
  else if (key == "out_dir") spec.out_dir = val;
  else if (key == "load_torque") spec.motor.load_torque = num();
  else throw ParseError(context + ": unknown key '" + std::string(key) + "'");
}

inline ExperimentSpec parse_spec_text(std::string_view text, const std::string& path) {
  ExperimentSpec spec;
  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++lineno;
    std::string_view line = detail::trim(text.substr(start, end - start));
    start = end + 1;
    if (line.empty() || line.front() == '#') {
      if (end == text.size()) break;
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string_view key = detail::trim(line.substr(0, eq));
    const std::string_view value = detail::trim(line.substr(eq + 1));
    apply_setting(spec, key, value, path + ":" + std::to_string(lineno));
    if (end == text.size()) break;
  }
  return spec;
}

inline ExperimentSpec parse_spec_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open spec file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_spec_text(text, path);
}

}  // namespace relid
