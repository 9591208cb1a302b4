// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <nlohmann/json.hpp>
#include <sstream>

#include "asgd/harness/config.hpp"
#include "asgd/harness/experiment.hpp"
#include "asgd/harness/report.hpp"

namespace asgd::harness {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("asgd_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

constexpr const char* kSmall = R"(# small quadratic run
objective = quadratic
workers = 4
strategy = async

[objective]
dim = 5
noise_sigma = 0.5

[data]
samples = 200
cost_max = 20
budget = 40

[budget]
updates = 300
)";

TEST(Config, MinimalAppliesDefaults) {
  const auto cfg = parse_config("objective = quadratic\nworkers = 4\nstrategy = async\n");
  EXPECT_EQ(cfg, ExperimentConfig{});
}

TEST(Config, SectionsAndComments) {
  const auto cfg = parse_config(kSmall);
  EXPECT_EQ(cfg.objective.dim, 5u);
  EXPECT_EQ(cfg.data.samples, 200u);
  EXPECT_EQ(cfg.batch_budget, 40);
  EXPECT_EQ(cfg.max_updates, 300u);
}

TEST(Config, GlobalAccumZeroNamesTheConstraint) {
  try {
    parse_config("objective = quadratic\nworkers = 4\nstrategy = global_accum\nstrategy.global = 0\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("G >= 1"), std::string::npos) << e.what();
  }
}

TEST(Config, RoundTripEveryStrategy) {
  const char* variants[] = {
      "strategy = sync\n",
      "strategy = sync_stale\nstrategy.pull_every = 7\n",
      "strategy = local_accum\nstrategy.local = 4\ncombine = sum\n",
      "strategy = global_accum\nstrategy.global = 4\ncompute = normal\ncompute.stddev = 0.2\n",
      "strategy = combined\nstrategy.local = 2\nstrategy.global = 2\nlr.decay = inverse_sqrt\nlr.warmup = 40\n",
      "objective = mlp\noptimizer = sgd\nreport.thresholds = 0.3,0.05\nreport.reference_loss = 0.125\n",
      "objective = linreg\nobjective.dim = 7\nparallel = true\noutput.name = weird name\nlr.base = 0.1\n",
  };
  for (const char* v : variants) {
    const auto cfg = parse_config(v);
    const auto text = serialize_config(cfg);
    EXPECT_EQ(parse_config(text), cfg) << text;
    EXPECT_EQ(serialize_config(parse_config(text)), text);
  }
}

TEST(Config, RejectsUnknownAndDuplicateKeys) {
  EXPECT_THROW(parse_config("workerz = 4\n"), ConfigError);
  EXPECT_THROW(parse_config("workers = 4\nworkers = 5\n"), ConfigError);
  EXPECT_THROW(parse_config("strategy = async\nstrategy.global = 4\n"), ConfigError);
  EXPECT_THROW(parse_config("strategy = warp\n"), ConfigError);
  EXPECT_THROW(parse_config("workers = four\n"), ConfigError);
  EXPECT_THROW(parse_config("workers = 0\n"), ConfigError);
}

TEST(Config, SyntaxErrorsCarryLineNumbers) {
  try {
    parse_config("workers = 4\n# fine\n\nthis line has no equals sign\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
  try {
    parse_config("workers = 4\n[broken\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Config, OverridesWinAndAreValidated) {
  const auto cfg = parse_config(kSmall, {{"workers", "8"}, {"lr.base", "0.02"}});
  EXPECT_EQ(cfg.workers, 8u);
  EXPECT_EQ(cfg.lr.base_lr, 0.02);
  EXPECT_THROW(parse_config(kSmall, {{"nonsense", "1"}}), ConfigError);
}

TEST(Trace, CsvRoundTrip) {
  const auto trace = sim::run_simulation(parse_config(kSmall));
  std::stringstream ss;
  sim::write_trace_csv(ss, trace.rows);
  std::string first;
  std::getline(std::istringstream(ss.str()) >> std::ws, first);
  EXPECT_EQ(first, sim::kTraceSchema);
  EXPECT_EQ(sim::read_trace_csv(ss), trace.rows);
}

TEST(Trace, CsvRejectsWrongSchema) {
  std::stringstream ss("# asgd-trace schema=9\nupdate_idx\n");
  EXPECT_THROW(sim::read_trace_csv(ss), Error);
}

TEST(Experiment, WritesFilesAndThresholdsAgreeWithRawTrace) {
  auto cfg = parse_config(kSmall);
  cfg.out_dir = scratch_dir("thresholds").string();
  const auto res = run_experiment(cfg);
  const auto js = nlohmann::json::parse(slurp(res.json_path));
  EXPECT_EQ(js["schema"], kSummarySchema);
  EXPECT_EQ(js["updates"], 300);

  std::ifstream csv(res.csv_path);
  const auto rows = sim::read_trace_csv(csv);
  const double initial = js["initial_loss"];
  const double reference = js["reference_loss"];
  EXPECT_EQ(reference, 0.0);  // known minimum of the quadratic
  double prev_time = -1.0;
  for (const auto& t : js["thresholds"]) {
    const double level = reference + t["fraction"].get<double>() * (initial - reference);
    std::optional<double> when;
    for (const auto& r : rows) {
      if (r.loss_probe <= level) {
        when = r.sim_time_s;
        break;
      }
    }
    ASSERT_EQ(when.has_value(), !t["time_s"].is_null());
    if (when) {
      EXPECT_EQ(*when, t["time_s"].get<double>());
      EXPECT_GE(*when, prev_time);  // harder thresholds are never reached earlier
      prev_time = *when;
    }
  }
  EXPECT_EQ(js["final_loss"].get<double>(), rows.back().loss_probe);
}

TEST(Experiment, SameSeedByteIdenticalCsv) {
  auto cfg = parse_config(kSmall);
  cfg.compute = NormalTime{1.0, 0.3};
  cfg.out_dir = scratch_dir("det_a").string();
  const auto a = run_experiment(cfg);
  cfg.out_dir = scratch_dir("det_b").string();
  const auto b = run_experiment(cfg);
  EXPECT_EQ(slurp(a.csv_path), slurp(b.csv_path));
  EXPECT_FALSE(slurp(a.csv_path).empty());
}

TEST(Experiment, ExitCodes) {
  auto cfg = parse_config(kSmall);
  cfg.out_dir = scratch_dir("codes").string();
  cfg.lr.base_lr = 0.02;
  cfg.thresholds = {0.5};
  EXPECT_EQ(run_experiment(cfg).exit_code, kExitOk);

  cfg.thresholds = {1e-12};
  EXPECT_EQ(run_experiment(cfg).exit_code, kExitUnreached);

  cfg.optimizer = OptimizerKind::kSgd;
  cfg.lr.base_lr = 50.0;
  cfg.max_updates = 100000;
  const auto res = run_experiment(cfg);
  EXPECT_EQ(res.exit_code, kExitDiverged);
  EXPECT_EQ(nlohmann::json::parse(slurp(res.json_path))["status"], "diverged");
  std::ifstream csv(res.csv_path);
  EXPECT_FALSE(sim::read_trace_csv(csv).empty());
}

TEST(Experiment, OutputDirFallsBackToEnvironment) {
  ExperimentConfig cfg;
  cfg.out_dir = "explicit";
  EXPECT_EQ(output_dir(cfg), fs::path("explicit"));
  cfg.out_dir.clear();
  ::setenv(kOutDirEnv, "from_env", 1);
  EXPECT_EQ(output_dir(cfg), fs::path("from_env"));
  ::unsetenv(kOutDirEnv);
  EXPECT_EQ(output_dir(cfg), fs::path("."));
}

TEST(Sweep, OneSummaryPerGridPoint) {
  const auto dir = scratch_dir("sweep");
  const auto axes = std::vector<GridAxis>{parse_grid_axis("lr.base=0.01,0.03"), parse_grid_axis("workers=1,2,4")};
  const auto points = run_sweep(kSmall, axes, {{"output.dir", dir.string()}}, 3);
  ASSERT_EQ(points.size(), 6u);
  EXPECT_EQ(points[0].config.lr.base_lr, 0.01);
  EXPECT_EQ(points[5].config.workers, 4u);
  std::set<fs::path> files;
  for (const auto& p : points) {
    EXPECT_TRUE(fs::exists(p.result.json_path));
    files.insert(p.result.json_path);
  }
  EXPECT_EQ(files.size(), 6u);
  EXPECT_THROW(parse_grid_axis("lr.base"), ConfigError);
  EXPECT_THROW(parse_grid_axis("lr.base="), ConfigError);
}

}  // namespace
}  // namespace asgd::harness
