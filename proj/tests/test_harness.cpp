#include <catch_amalgamated.hpp>

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "relid/cli.hpp"
#include "relid/csv.hpp"
#include "relid/experiment.hpp"
#include "relid/metrics.hpp"
#include "relid/snapshot.hpp"

using namespace relid;
namespace fs = std::filesystem;

namespace {

/// Scratch directory removed when the test section ends.
struct TempDir {
  fs::path path;

  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("relid_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string str(const std::string& name) const { return (path / name).string(); }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out.good());
  out << text;
}

/// A half-second noisy sinusoid run; small enough for unit tests.
std::string mini_spec_text(const std::string& scenario) {
  return "scenario = " + scenario +
         "\n"
         "profile = sinusoid\n"
         "amplitude = 10\n"
         "frequency = 0.5\n"
         "duration = 0.5\n"
         "sim_dt = 1e-4\n"
         "u_noise_fraction = 0.1\n"
         "u_noise_nominal = 10\n"
         "ident_dt = 1e-3\n"
         "seed = 5\n";
}

}  // namespace

TEST_CASE("error metrics summarize a trace", "[harness]") {
  SECTION("zero error everywhere") {
    std::vector<TraceRow> trace(8);
    const Metrics m = compute_metrics(trace);
    CHECK(m.rmse == 0.0);
    CHECK(m.max_abs_error == 0.0);
    CHECK(m.samples == 8);
  }
  SECTION("the 3-4 pair") {
    std::vector<TraceRow> trace(2);
    trace[0].e = 3.0;
    trace[1].e = 4.0;
    const Metrics m = compute_metrics(trace);
    CHECK(m.rmse == Catch::Approx(std::sqrt(12.5)).margin(1e-12));
    CHECK(m.max_abs_error == 4.0);
  }
  SECTION("constant magnitude gives equal quarters") {
    std::vector<TraceRow> trace(40);
    for (auto& r : trace) r.e = -2.5;
    const Metrics m = compute_metrics(trace);
    for (double q : m.quarter_rmse) CHECK(q == Catch::Approx(2.5).margin(1e-12));
  }
  SECTION("an empty trace is rejected") {
    CHECK_THROWS_AS(compute_metrics(std::vector<TraceRow>{}), InputError);
  }
}

TEST_CASE("sample streams survive a CSV round trip", "[harness]") {
  TempDir dir;
  std::vector<Sample> samples;
  for (int k = 0; k < 100; ++k) {
    samples.push_back({k * 1e-3, std::sin(k / 7.0) * 10.0, std::cos(k / 5.0) * 120.0});
  }
  const std::string path = dir.str("round.csv");
  write_series(path, samples);
  const Series loaded = load_series(path);
  REQUIRE(loaded.samples.size() == samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) {
    CHECK(std::abs(loaded.samples[k].t - samples[k].t) <= 1e-9);
    CHECK(std::abs(loaded.samples[k].u - samples[k].u) <= 1e-9);
    CHECK(std::abs(loaded.samples[k].y - samples[k].y) <= 1e-9);
  }
  CHECK(loaded.dt == Catch::Approx(1e-3).margin(1e-9));
}

TEST_CASE("the CSV reader enforces its format", "[harness]") {
  TempDir dir;
  const std::string path = dir.str("data.csv");

  SECTION("a well-formed three-row file") {
    write_file(path, "t,u,y\n0,1,2\n0.1,3,4\n0.2,5,6\n");
    const Series s = load_series(path);
    REQUIRE(s.samples.size() == 3);
    CHECK(s.samples[2] == Sample{0.2, 5.0, 6.0});
  }
  SECTION("a header-only file is an empty stream") {
    write_file(path, "t,u,y\n");
    const Series s = load_series(path);
    CHECK(s.samples.empty());
    CHECK(s.dt == 0.0);
  }
  SECTION("blank lines are skipped") {
    write_file(path, "t,u,y\n0,1,2\n\n0.1,3,4\n");
    CHECK(load_series(path).samples.size() == 2);
  }
  SECTION("non-increasing timestamps are rejected") {
    write_file(path, "t,u,y\n0.2,1,2\n0.1,3,4\n");
    CHECK_THROWS_AS(load_series(path), ParseError);
  }
  SECTION("a malformed number names its line") {
    write_file(path, "t,u,y\n0,1,2\n0.1,oops,4\n");
    CHECK_THROWS_WITH(load_series(path), Catch::Matchers::ContainsSubstring(":3:"));
  }
  SECTION("a short row is rejected") {
    write_file(path, "t,u,y\n0,1\n");
    CHECK_THROWS_AS(load_series(path), ParseError);
  }
  SECTION("a wrong header is rejected") {
    write_file(path, "time,in,out\n0,1,2\n");
    CHECK_THROWS_AS(load_series(path), ParseError);
  }
  SECTION("a missing file is reported with its path") {
    CHECK_THROWS_WITH(load_series(dir.str("nope.csv")),
                      Catch::Matchers::ContainsSubstring("nope.csv"));
  }
}

TEST_CASE("trace files load back as sample streams", "[harness]") {
  TempDir dir;
  std::vector<TraceRow> rows;
  for (int k = 0; k < 10; ++k) rows.push_back({k * 0.5, 1.0 * k, 2.0 * k, 0.0, 2.0 * k});
  const std::string path = dir.str("run.trace.csv");
  write_trace(path, rows);
  const Series s = load_series(path);  // y_hat and e columns are ignored
  REQUIRE(s.samples.size() == rows.size());
  CHECK(s.samples[3].u == Catch::Approx(3.0).margin(1e-9));
}

TEST_CASE("experiment specs parse from flat key-value text", "[harness]") {
  const std::string text =
      "# demo\n"
      "scenario = steps_demo\n"
      "profile = steps\n"
      "steps = 0:0, 1:8, 2.5:-3\n"
      "load_steps = 0:1.0, 3:0\n"
      "duration = 4\n"
      "sim_dt = 1e-4\n"
      "model = full_dq\n"
      "current_kp = 800\n"
      "\n"
      "alpha = 1.4\n"
      "beta = 0.9\n"
      "gamma = 0.15\n"
      "filter_order = 2\n"
      "n_sets = 5\n"
      "u_init_limit = 12\n"
      "y_init_limit = 9\n"
      "ident_dt = 2e-3\n"
      "integral_clamp = 3\n"
      "u_noise_fraction = 0.1\n"
      "y_noise_fraction = 0.05\n"
      "y_noise_nominal = 100\n"
      "seed = 42\n"
      "out_dir = /tmp/somewhere\n";
  const ExperimentSpec spec = parse_spec_text(text, "demo.cfg");
  CHECK(spec.scenario == "steps_demo");
  CHECK(spec.profile == ProfileKind::Steps);
  REQUIRE(spec.steps.size() == 3);
  CHECK(spec.steps[2] == std::pair{2.5, -3.0});
  REQUIRE(spec.load_steps.size() == 2);
  CHECK(spec.model == MotorModel::FullDq);
  CHECK(spec.current_kp == 800.0);
  CHECK(spec.ident.alpha == 1.4);
  CHECK(spec.ident.filter_order == 2);
  CHECK(spec.ident.n_sets == 5);
  CHECK(spec.ident.u_init_limit == 12.0);
  CHECK(spec.ident.dt == 2e-3);
  CHECK(spec.ident.integral_clamp == 3.0);
  CHECK(spec.y_noise_nominal == 100.0);
  CHECK(spec.seed == 42);
  CHECK(spec.out_dir == "/tmp/somewhere");
  CHECK_NOTHROW(spec.validate());
}

TEST_CASE("spec parsing rejects mistakes with line context", "[harness]") {
  CHECK_THROWS_WITH(parse_spec_text("scenario = a\nbogus_key = 3\n", "x.cfg"),
                    Catch::Matchers::ContainsSubstring("x.cfg:2"));
  CHECK_THROWS_AS(parse_spec_text("profile sinusoid\n", "x.cfg"), ParseError);
  CHECK_THROWS_AS(parse_spec_text("profile = triangle\n", "x.cfg"), ParseError);
  CHECK_THROWS_AS(parse_spec_text("model = acoustic\n", "x.cfg"), ParseError);
  CHECK_THROWS_AS(parse_spec_text("steps = 1;2\n", "x.cfg"), ParseError);
  CHECK_THROWS_AS(parse_spec_text("duration = fast\n", "x.cfg"), ParseError);
}

TEST_CASE("spec validation catches inconsistent sampling", "[harness]") {
  ExperimentSpec spec;
  spec.sim_dt = 1e-4;
  spec.ident.dt = 2.5e-4;  // not an integer multiple
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.ident.dt = 1e-3;
  CHECK_NOTHROW(spec.validate());
  CHECK(spec.output_stride() == 10);
  spec.scenario.clear();
  CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("generated streams separate clean and noisy views", "[harness]") {
  ExperimentSpec spec;
  spec.duration = 0.5;
  spec.seed = 9;

  SECTION("without noise both views agree") {
    const GeneratedStream g = generate_stream(spec);
    REQUIRE(g.noisy.size() == g.y_clean.size());
    for (std::size_t k = 0; k < g.noisy.size(); ++k) CHECK(g.noisy[k].y == g.y_clean[k]);
  }
  SECTION("output noise is bounded by the clean peak") {
    spec.y_noise_fraction = 0.1;
    const GeneratedStream g = generate_stream(spec);
    double peak = 0.0;
    for (double v : g.y_clean) peak = std::max(peak, std::abs(v));
    CHECK(g.peak_clean_abs_y == Catch::Approx(peak));
    for (std::size_t k = 0; k < g.noisy.size(); ++k) {
      CHECK(std::abs(g.noisy[k].y - g.y_clean[k]) <= 0.1 * peak + 1e-12);
    }
  }
}

TEST_CASE("an experiment writes its trace, snapshot, and report", "[harness]") {
  TempDir dir;
  ExperimentSpec spec = parse_spec_text(mini_spec_text("mini"), "mini.cfg");
  spec.out_dir = dir.path.string();

  const RunReport report = run_experiment(spec);
  CHECK(report.synthetic);
  REQUIRE(report.metrics.samples == 501);  // t = 0 plus 500 identifier cycles
  CHECK(report.trace.size() == 501);
  CHECK(report.rmse_vs_clean.has_value());
  CHECK(report.metrics.rmse >= 0.0);
  REQUIRE(fs::exists(report.trace_path));
  REQUIRE(fs::exists(report.snapshot_path));
  REQUIRE(fs::exists(report.report_path));

  const nlohmann::json j = nlohmann::json::parse(read_file(report.report_path));
  CHECK(j.at("scenario") == "mini");
  CHECK(j.at("synthetic") == true);
  CHECK(j.at("samples") == 501);
  CHECK(j.at("rmse").get<double>() == Catch::Approx(report.metrics.rmse));
  CHECK(j.at("quarter_rmse").size() == 4);
  CHECK(j.contains("rmse_vs_clean"));

  SECTION("the same spec reproduces the trace byte for byte") {
    TempDir dir2;
    ExperimentSpec again = spec;
    again.out_dir = dir2.path.string();
    const RunReport second = run_experiment(again);
    CHECK(read_file(second.trace_path) == read_file(report.trace_path));
  }
}

TEST_CASE("a recorded trace replays to nearly identical predictions", "[harness]") {
  TempDir dir;
  ExperimentSpec spec = parse_spec_text(mini_spec_text("mini"), "mini.cfg");
  spec.out_dir = dir.path.string();
  const RunReport original = run_experiment(spec);

  ExperimentSpec replay_spec = spec;
  replay_spec.scenario = "mini_replay";
  const Series series = load_series(original.trace_path);
  const RunReport replayed = run_replay(replay_spec, series);

  CHECK_FALSE(replayed.synthetic);
  CHECK_FALSE(replayed.rmse_vs_clean.has_value());
  REQUIRE(replayed.trace.size() == original.trace.size());
  for (std::size_t k = 0; k < replayed.trace.size(); ++k) {
    CHECK(std::abs(replayed.trace[k].y_hat - original.trace[k].y_hat) < 1e-5);
  }
}

TEST_CASE("an empty stream produces a header-only trace and no snapshot", "[harness]") {
  TempDir dir;
  ExperimentSpec spec;
  spec.scenario = "empty";
  spec.out_dir = dir.path.string();

  const RunReport report = run_replay(spec, Series{});
  CHECK(report.metrics.samples == 0);
  CHECK(report.snapshot_path.empty());
  CHECK(read_file(report.trace_path) == "t,u,y,y_hat,e\n");
  const nlohmann::json j = nlohmann::json::parse(read_file(report.report_path));
  CHECK(j.at("samples") == 0);
  CHECK_FALSE(j.contains("rmse"));
}

TEST_CASE("model snapshots survive the JSON file format", "[harness]") {
  TempDir dir;
  IdentifierConfig cfg;
  cfg.filter_order = 2;
  cfg.gamma = 0.35;
  Identifier id(cfg);
  for (int k = 0; k < 50; ++k) {
    id.step(std::sin(k / 9.0) * 12.0, std::cos(k / 6.0) * 9.0);
  }

  const std::string path = dir.str("model.snapshot.json");
  save_snapshot(path, id.snapshot());
  const ModelSnapshot loaded = load_snapshot(path);

  CHECK(loaded.config == id.config());
  CHECK(loaded.relation == id.relation());
  CHECK(loaded.input_partition == id.input_partition());
  CHECK(loaded.output_partition == id.output_partition());
  CHECK(loaded.error_integral == id.error_integral());
  CHECK(loaded.sample_count == id.sample_count());

  // Resuming from the file continues bit-identically.
  Identifier resumed = Identifier::restore(loaded);
  for (int k = 0; k < 50; ++k) {
    const double u = std::sin(k / 4.0) * 12.0;
    const double y = std::cos(k / 3.0) * 9.0;
    const StepResult a = id.step(u, y);
    const StepResult b = resumed.step(u, y);
    REQUIRE(a.y_hat == b.y_hat);
    REQUIRE(a.error == b.error);
  }
}

TEST_CASE("snapshot loading rejects foreign or corrupt files", "[harness]") {
  TempDir dir;
  const std::string path = dir.str("bad.json");

  write_file(path, "{not json");
  CHECK_THROWS_AS(load_snapshot(path), ParseError);

  write_file(path, R"({"format":"other","version":1})");
  CHECK_THROWS_AS(load_snapshot(path), ParseError);

  Identifier id{IdentifierConfig{}};
  nlohmann::json j = snapshot_to_json(id.snapshot());
  j["version"] = 2;
  write_file(path, j.dump());
  CHECK_THROWS_AS(load_snapshot(path), ParseError);

  j["version"] = 1;
  j["config"]["gamma"] = 7.0;
  write_file(path, j.dump());
  CHECK_THROWS_AS(load_snapshot(path), ParseError);

  CHECK_THROWS_AS(load_snapshot(dir.str("missing.json")), ParseError);
}

TEST_CASE("the command line drives the whole pipeline", "[harness][cli]") {
  TempDir dir;
  write_file(dir.str("mini.cfg"), mini_spec_text("mini"));
  std::ostringstream out, err;

  SECTION("identify produces artifacts and reports success") {
    const int code = run_cli({"identify", "--spec", dir.str("mini.cfg"), "--out-dir",
                              dir.path.string()},
                             out, err);
    CHECK(code == 0);
    CHECK(out.str().find("scenario mini") != std::string::npos);
    CHECK(fs::exists(dir.str("mini.trace.csv")));
    CHECK(fs::exists(dir.str("mini.snapshot.json")));
    CHECK(fs::exists(dir.str("mini.report.json")));

    SECTION("explain-rules lists rules from the snapshot") {
      std::ostringstream rules;
      const int rc = run_cli({"explain-rules", "--snapshot", dir.str("mini.snapshot.json"),
                              "--threshold", "0.5"},
                             rules, err);
      CHECK(rc == 0);
      CHECK(rules.str().find("IF u is") != std::string::npos);
    }
    SECTION("replay consumes the emitted trace") {
      std::ostringstream replay_out;
      const int rc = run_cli({"replay", "--spec", dir.str("mini.cfg"), "--data",
                              dir.str("mini.trace.csv"), "--out-dir", dir.path.string(),
                              "--set", "scenario=mini2"},
                             replay_out, err);
      CHECK(rc == 0);
      CHECK(fs::exists(dir.str("mini2.trace.csv")));
    }
  }
  SECTION("simulate emits a loadable data file") {
    const int code = run_cli({"simulate", "--spec", dir.str("mini.cfg"), "--out-dir",
                              dir.path.string()},
                             out, err);
    CHECK(code == 0);
    const Series s = load_series(dir.str("mini.data.csv"));
    CHECK(s.samples.size() == 501);
  }
  SECTION("overrides change the run") {
    REQUIRE(run_cli({"identify", "--spec", dir.str("mini.cfg"), "--out-dir",
                     dir.path.string()},
                    out, err) == 0);
    const std::string base = read_file(dir.str("mini.trace.csv"));
    REQUIRE(run_cli({"identify", "--spec", dir.str("mini.cfg"), "--out-dir",
                     dir.path.string(), "--set", "gamma=1"},
                    out, err) == 0);
    CHECK(read_file(dir.str("mini.trace.csv")) != base);
  }
  SECTION("a missing spec file is a runtime failure naming the path") {
    const int code = run_cli({"identify", "--spec", dir.str("absent.cfg")}, out, err);
    CHECK(code == 2);
    CHECK(err.str().find("absent.cfg") != std::string::npos);
  }
  SECTION("usage mistakes exit with the usage code") {
    CHECK(run_cli({"frobnicate"}, out, err) == 1);
    CHECK(run_cli({}, out, err) == 1);
    CHECK(run_cli({"identify"}, out, err) == 1);  // --spec is required
  }
  SECTION("help is not an error") {
    CHECK(run_cli({"--help"}, out, err) == 0);
    CHECK(out.str().find("simulate") != std::string::npos);
  }
}
