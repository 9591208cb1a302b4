// SPDX-License-Identifier: Apache-2.0
//
// Command-line runner for the distributed SGD simulator.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "asgd/harness/config.hpp"
#include "asgd/harness/experiment.hpp"
#include "asgd/harness/selftest.hpp"
#include "asgd/models/dataset_io.hpp"

namespace {

using namespace asgd;
using namespace asgd::harness;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CommonFlags {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  bool parallel = false;
  std::vector<std::string> sets;

  KeyValues overrides() const {
    KeyValues kv;
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
      kv.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    if (seed) kv.emplace_back("seed", std::to_string(*seed));
    if (out_dir) kv.emplace_back("output.dir", *out_dir);
    if (parallel) kv.emplace_back("parallel", "true");
    return kv;
  }
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--seed", f.seed, "Override the run seed");
  cmd->add_option("--out-dir", f.out_dir, "Output directory (default: $ASGD_OUT_DIR or .)");
  cmd->add_flag("--parallel", f.parallel, "Use the threaded executor instead of the simulator");
  cmd->add_option("--set", f.sets, "Override a config key, key=value (repeatable)");
}

void print_summary(const ExperimentConfig& cfg, const ExperimentResult& r) {
  const auto& s = r.report;
  std::printf("%s: %s updates=%llu pushes=%llu mean_staleness=%.4f final_loss=%.6g best_loss=%.6g sim_time=%.3fs\n",
              cfg.name.c_str(), s.status == sim::RunStatus::kOk ? "ok" : "DIVERGED",
              static_cast<unsigned long long>(s.updates), static_cast<unsigned long long>(s.pushes),
              s.mean_staleness, s.final_loss, s.best_loss, s.sim_time_s);
  if (!s.diagnostic.empty()) std::printf("  diagnostic: %s\n", s.diagnostic.c_str());
  for (const auto& t : s.thresholds) {
    if (t.reached()) {
      std::printf("  loss <= %.6g (fraction %g): %.3fs at update %llu\n", t.level, t.fraction, *t.time_s,
                  static_cast<unsigned long long>(*t.update));
    } else {
      std::printf("  loss <= %.6g (fraction %g): unreached\n", t.level, t.fraction);
    }
  }
}

int cmd_run(const std::string& path, const CommonFlags& flags) {
  const auto cfg = parse_config(read_file(path), flags.overrides());
  const auto res = run_experiment(cfg);
  print_summary(cfg, res);
  std::printf("  wrote %s, %s\n", res.csv_path.string().c_str(), res.json_path.string().c_str());
  return res.exit_code;
}

int cmd_sweep(const std::string& path, const std::vector<std::string>& grid, unsigned jobs, const CommonFlags& flags) {
  std::vector<GridAxis> axes;
  for (const auto& g : grid) axes.push_back(parse_grid_axis(g));
  const auto points = run_sweep(read_file(path), axes, flags.overrides(), jobs);
  int worst = kExitOk;
  const auto dir = output_dir(points.front().config);
  std::ofstream index(dir / (parse_config(read_file(path), flags.overrides()).name + "_sweep.csv"));
  index << "name,overrides,status,mean_staleness,final_loss,best_loss,updates,exit_code\n";
  for (const auto& p : points) {
    print_summary(p.config, p.result);
    std::string ov;
    for (const auto& [k, v] : p.overrides) ov += (ov.empty() ? "" : ";") + k + "=" + v;
    const auto& s = p.result.report;
    index << p.config.name << ',' << ov << ',' << (s.status == sim::RunStatus::kOk ? "ok" : "diverged") << ','
          << s.mean_staleness << ',' << s.final_loss << ',' << s.best_loss << ',' << s.updates << ','
          << p.result.exit_code << '\n';
    worst = std::max(worst, p.result.exit_code);
  }
  return worst;
}

int cmd_selftest(const std::string& which, bool verbose) {
  SelfTestReport rep;
  if (which == "adam") rep = selftest_adam_table();
  else if (which == "staleness") rep = selftest_staleness_table();
  else if (which == "gradients") rep = selftest_gradients();
  else throw ConfigError("selftest: expected adam, staleness or gradients");
  print_report(std::cout, rep, verbose);
  return rep.passed() ? kExitOk : kExitError;
}

int cmd_dataset(const std::string& path, const std::string& out, const std::string& format, const CommonFlags& flags) {
  const auto cfg = parse_config(read_file(path), flags.overrides());
  RngStream rng(cfg.seed, sim::kDataStream);
  const auto samples =
      models::generate_samples(cfg.objective, cfg.data.samples, cfg.data.cost_min, cfg.data.cost_max, rng);
  std::ofstream os(out, std::ios::binary);
  if (!os) throw Error("cannot open " + out);
  if (format == "csv") models::write_dataset_text(os, samples);
  else models::write_dataset_binary(os, samples);
  std::printf("wrote %zu samples to %s\n", samples.size(), out.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic simulator for synchronous, asynchronous and accumulated SGD"};
  app.require_subcommand(1);

  CommonFlags run_flags, sweep_flags, data_flags;
  std::string run_cfg, sweep_cfg, data_cfg, data_out, data_format = "csv", which;
  std::vector<std::string> grid;
  unsigned jobs = 1;
  bool verbose = false;

  auto* run = app.add_subcommand("run", "Run one experiment from a config file");
  run->add_option("config", run_cfg, "Config file")->required();
  add_common(run, run_flags);

  auto* sweep = app.add_subcommand("sweep", "Run a config over a grid of key values");
  sweep->add_option("config", sweep_cfg, "Config file")->required();
  sweep->add_option("--grid", grid, "Axis as key=v1,v2,... (repeatable)")->required();
  sweep->add_option("--jobs", jobs, "Experiments to run concurrently")->default_val(1);
  add_common(sweep, sweep_flags);

  auto* selftest = app.add_subcommand("selftest", "Check the built-in reference values");
  selftest->add_option("which", which, "adam, staleness or gradients")
      ->required()
      ->check(CLI::IsMember({"adam", "staleness", "gradients"}));
  selftest->add_flag("-v,--verbose", verbose, "Print every check");

  auto* dataset = app.add_subcommand("dataset", "Dump the synthetic training set of a config");
  dataset->add_option("config", data_cfg, "Config file")->required();
  dataset->add_option("--out", data_out, "Output file")->required();
  dataset->add_option("--format", data_format, "csv or bin")->check(CLI::IsMember({"csv", "bin"}));
  add_common(dataset, data_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_cfg, run_flags);
    if (*sweep) return cmd_sweep(sweep_cfg, grid, jobs, sweep_flags);
    if (*selftest) return cmd_selftest(which, verbose);
    if (*dataset) return cmd_dataset(data_cfg, data_out, data_format, data_flags);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
  return kExitError;
}
