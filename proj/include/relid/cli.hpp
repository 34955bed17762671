#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "relid/csv.hpp"
#include "relid/errors.hpp"
#include "relid/experiment.hpp"
#include "relid/fuzzy_algebra.hpp"
#include "relid/snapshot.hpp"

namespace relid {

namespace detail {

struct CommonArgs {
  std::string spec_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::vector<std::string> overrides;
};

inline void add_common_options(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--spec", args.spec_path, "experiment spec file (key = value lines)")
      ->required();
  cmd->add_option("--out-dir", args.out_dir, "directory for generated artifacts");
  cmd->add_option("--seed", args.seed, "noise seed override")
      ->each([&args](const std::string&) { args.seed_given = true; });
  cmd->add_option("--set", args.overrides, "override a spec entry, e.g. --set gamma=0.2");
}

inline ExperimentSpec resolve_spec(const CommonArgs& args) {
  ExperimentSpec spec = parse_spec_file(args.spec_path);
  for (const std::string& item : args.overrides) {
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos) throw ParseError("--set expects key=value, got '" + item + "'");
    apply_setting(spec, trim(std::string_view(item).substr(0, eq)),
                  trim(std::string_view(item).substr(eq + 1)), "--set " + item);
  }
  if (!args.out_dir.empty()) spec.out_dir = args.out_dir;
  if (args.seed_given) spec.seed = args.seed;
  return spec;
}

inline void print_report(std::ostream& out, const RunReport& r) {
  char buf[160];
  out << "scenario " << r.scenario << ": " << r.metrics.samples << " samples\n";
  if (r.metrics.samples > 0) {
    std::snprintf(buf, sizeof(buf), "  rmse %.6f  max |e| %.6f\n", r.metrics.rmse,
                  r.metrics.max_abs_error);
    out << buf;
    std::snprintf(buf, sizeof(buf), "  quarter rmse %.6f %.6f %.6f %.6f\n",
                  r.metrics.quarter_rmse[0], r.metrics.quarter_rmse[1], r.metrics.quarter_rmse[2],
                  r.metrics.quarter_rmse[3]);
    out << buf;
    if (r.rmse_vs_clean) {
      std::snprintf(buf, sizeof(buf), "  rmse vs clean %.6f\n", *r.rmse_vs_clean);
      out << buf;
    }
  }
  out << "  trace: " << r.trace_path << "\n";
  if (!r.snapshot_path.empty()) out << "  snapshot: " << r.snapshot_path << "\n";
  out << "  report: " << r.report_path << "\n";
}

}  // namespace detail

/// Command-line entry point; returns a process exit code.
/// 0 = success, 1 = usage error, 2 = runtime failure (unreadable or
/// malformed files included).
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"on-line fuzzy relational identification of a motor drive"};
  app.require_subcommand(1);

  detail::CommonArgs sim_args, ident_args, replay_args;
  std::string replay_data, rules_snapshot;
  double rules_threshold = 0.5;

  CLI::App* sim = app.add_subcommand("simulate", "generate a scenario's data stream as CSV");
  detail::add_common_options(sim, sim_args);

  CLI::App* ident = app.add_subcommand("identify", "simulate a scenario and identify on-line");
  detail::add_common_options(ident, ident_args);

  CLI::App* replay = app.add_subcommand("replay", "identify over a recorded t,u,y stream");
  detail::add_common_options(replay, replay_args);
  replay->add_option("--data", replay_data, "input CSV with t,u,y columns")->required();

  CLI::App* rules = app.add_subcommand("explain-rules", "list the model's strongest rules");
  rules->add_option("--snapshot", rules_snapshot, "model snapshot file")->required();
  rules->add_option("--threshold", rules_threshold, "minimum possibility to report");

  try {
    // CLI11's vector overload consumes arguments from the back.
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (sim->parsed()) {
      const ExperimentSpec spec = detail::resolve_spec(sim_args);
      const GeneratedStream stream = generate_stream(spec);
      std::filesystem::create_directories(spec.out_dir);
      const std::string path =
          (std::filesystem::path(spec.out_dir) / (spec.scenario + ".data.csv")).string();
      write_series(path, stream.noisy);
      out << "scenario " << spec.scenario << ": wrote " << stream.noisy.size() << " samples to "
          << path << "\n";
    } else if (ident->parsed()) {
      detail::print_report(out, run_experiment(detail::resolve_spec(ident_args)));
    } else if (replay->parsed()) {
      const ExperimentSpec spec = detail::resolve_spec(replay_args);
      const Series series = load_series(replay_data);
      detail::print_report(out, run_replay(spec, series));
    } else if (rules->parsed()) {
      const ModelSnapshot snap = load_snapshot(rules_snapshot);
      const auto records =
          explain_rules(snap.relation, default_labels(snap.input_partition.n_sets()),
                        default_labels(snap.output_partition.n_sets()), rules_threshold);
      for (const RuleRecord& r : records) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "IF u is %s THEN y is %s  (possibility %.3f)\n",
                      r.in_label.c_str(), r.out_label.c_str(), r.possibility);
        out << buf;
      }
      out << records.size() << " rule(s) at or above threshold " << rules_threshold << "\n";
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace relid
