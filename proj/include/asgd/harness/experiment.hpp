// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <string>
#include <vector>

#include "asgd/harness/config.hpp"
#include "asgd/harness/report.hpp"
#include "asgd/simulator/parallel.hpp"
#include "asgd/simulator/simulate.hpp"

namespace asgd::harness {

/// Process exit codes of the command-line runner.
enum ExitCode : int {
  kExitOk = 0,
  kExitError = 1,        // I/O and other runtime failures
  kExitConfig = 2,       // usage or configuration error
  kExitDiverged = 3,     // non-finite parameters or gradients
  kExitUnreached = 4,    // finished, but some loss threshold was never reached
};

inline constexpr const char* kOutDirEnv = "ASGD_OUT_DIR";

struct ExperimentResult {
  sim::RunTrace trace;
  SummaryReport report;
  std::filesystem::path csv_path;
  std::filesystem::path json_path;
  int exit_code = kExitOk;
};

/// Output directory: the config value, else $ASGD_OUT_DIR, else ".".
inline std::filesystem::path output_dir(const ExperimentConfig& cfg) {
  if (!cfg.out_dir.empty()) return cfg.out_dir;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return ".";
}

inline int exit_code_for(const SummaryReport& r) {
  if (r.status == sim::RunStatus::kDiverged) return kExitDiverged;
  if (!r.all_thresholds_reached()) return kExitUnreached;
  return kExitOk;
}

/// Runs one experiment and writes `<name>.csv` and `<name>.summary.json`
/// into the output directory. A diverged run still writes its partial trace.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  ExperimentResult res;
  res.trace = cfg.parallel ? sim::run_parallel(cfg) : sim::run_simulation(cfg);
  res.report = summarize(res.trace, cfg, models::known_min(models::make_objective(cfg.objective)));
  res.exit_code = exit_code_for(res.report);

  const auto dir = output_dir(cfg);
  std::filesystem::create_directories(dir);
  res.csv_path = dir / (cfg.name + ".csv");
  res.json_path = dir / (cfg.name + ".summary.json");
  {
    std::ofstream csv(res.csv_path, std::ios::binary);
    if (!csv) throw Error("cannot open " + res.csv_path.string() + " for writing");
    sim::write_trace_csv(csv, res.trace.rows);
    if (!csv) throw Error("write failed: " + res.csv_path.string());
  }
  {
    std::ofstream js(res.json_path, std::ios::binary);
    if (!js) throw Error("cannot open " + res.json_path.string() + " for writing");
    js << summary_to_json(res.report, cfg).dump(2) << '\n';
    if (!js) throw Error("write failed: " + res.json_path.string());
  }
  return res;
}

/// One axis of a sweep: a config key and the values it takes.
struct GridAxis {
  std::string key;
  std::vector<std::string> values;
};

/// Parses "key=v1,v2,...".
inline GridAxis parse_grid_axis(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("grid axis must look like key=v1,v2,...: " + spec);
  GridAxis axis{spec.substr(0, eq), {}};
  std::string rest = spec.substr(eq + 1);
  std::size_t start = 0;
  while (start <= rest.size()) {
    const auto comma = rest.find(',', start);
    std::string v = rest.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!v.empty()) axis.values.push_back(v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (axis.values.empty()) throw ConfigError("grid axis has no values: " + spec);
  return axis;
}

/// Cartesian product of the axes, first axis varying slowest.
inline std::vector<KeyValues> expand_grid(const std::vector<GridAxis>& axes) {
  std::vector<KeyValues> points{{}};
  for (const auto& axis : axes) {
    std::vector<KeyValues> next;
    for (const auto& p : points) {
      for (const auto& v : axis.values) {
        KeyValues q = p;
        q.emplace_back(axis.key, v);
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  return points;
}

inline std::string point_suffix(const KeyValues& point) {
  std::string out;
  for (const auto& [k, v] : point) {
    out += "_" + k + "-" + v;
  }
  for (char& c : out) {
    if (c == '/' || c == '\\' || c == ' ' || c == ':') c = '-';
  }
  return out;
}

struct SweepPoint {
  KeyValues overrides;
  ExperimentConfig config;
  ExperimentResult result;
};

/// Runs every grid point. Points are independent; with jobs > 1 they run
/// concurrently, each writing its own files.
inline std::vector<SweepPoint> run_sweep(std::string_view base_text, const std::vector<GridAxis>& axes,
                                         const KeyValues& extra = {}, unsigned jobs = 1) {
  std::vector<SweepPoint> points;
  for (auto& ov : expand_grid(axes)) {
    KeyValues all = extra;
    all.insert(all.end(), ov.begin(), ov.end());
    SweepPoint sp;
    sp.config = parse_config(base_text, all);
    sp.config.name += point_suffix(ov);
    sp.overrides = std::move(ov);
    points.push_back(std::move(sp));
  }
  if (jobs <= 1) {
    for (auto& sp : points) sp.result = run_experiment(sp.config);
    return points;
  }
  for (std::size_t start = 0; start < points.size(); start += jobs) {
    std::vector<std::future<ExperimentResult>> batch;
    for (std::size_t i = start; i < std::min(points.size(), start + jobs); ++i) {
      batch.push_back(std::async(std::launch::async, [&cfg = points[i].config] { return run_experiment(cfg); }));
    }
    for (std::size_t i = 0; i < batch.size(); ++i) points[start + i].result = batch[i].get();
  }
  return points;
}

}  // namespace asgd::harness
