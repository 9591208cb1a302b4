// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "asgd/harness/config.hpp"
#include "asgd/simulator/trace.hpp"

namespace asgd::harness {

inline constexpr const char* kSummarySchema = "asgd.summary/1";

/// A loss level between the initial loss and a reference minimum:
/// level = reference + fraction * (initial - reference).
struct ThresholdResult {
  double fraction = 0.0;
  double level = 0.0;
  std::optional<double> time_s;         // first simulated time the probe loss reached the level
  std::optional<std::uint64_t> update;  // update index at that row

  bool reached() const { return time_s.has_value(); }
};

struct SummaryReport {
  sim::RunStatus status = sim::RunStatus::kOk;
  std::string diagnostic;
  double mean_staleness = 0.0;
  std::map<std::uint64_t, std::uint64_t> staleness_histogram;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  double best_loss = 0.0;
  double reference_loss = 0.0;
  std::vector<ThresholdResult> thresholds;
  std::uint64_t pushes = 0;
  std::uint64_t updates = 0;
  std::uint64_t computes = 0;
  double sim_time_s = 0.0;
  double comm_time_s = 0.0;
  double throughput = 0.0;  // cost units per simulated second

  bool all_thresholds_reached() const {
    return std::all_of(thresholds.begin(), thresholds.end(), [](const auto& t) { return t.reached(); });
  }
};

/// First-crossing times of each threshold level over the trace rows.
inline std::vector<ThresholdResult> time_to_thresholds(const std::vector<sim::TraceRow>& rows, double initial,
                                                       double reference, const std::vector<double>& fractions) {
  std::vector<ThresholdResult> out;
  for (double f : fractions) {
    ThresholdResult r;
    r.fraction = f;
    r.level = reference + f * (initial - reference);
    for (const auto& row : rows) {
      if (row.loss_probe <= r.level) {
        r.time_s = row.sim_time_s;
        r.update = row.update_idx;
        break;
      }
    }
    out.push_back(r);
  }
  return out;
}

/// Reduces a trace to its summary. The threshold reference is, in order of
/// preference: the configured reference loss, the objective's known minimum,
/// the best probe loss seen in the run.
inline SummaryReport summarize(const sim::RunTrace& trace, const ExperimentConfig& cfg,
                               std::optional<double> known_minimum) {
  SummaryReport r;
  r.status = trace.status;
  r.diagnostic = trace.diagnostic;
  r.initial_loss = trace.initial_loss;
  r.final_loss = trace.rows.empty() ? trace.initial_loss : trace.rows.back().loss_probe;
  r.best_loss = trace.initial_loss;
  for (const auto& row : trace.rows) r.best_loss = std::min(r.best_loss, row.loss_probe);
  if (trace.rows.size() > trace.warmup_pushes) {
    const auto s = sim::staleness_summary(trace);
    r.mean_staleness = s.mean;
    r.staleness_histogram = s.histogram;
  }
  r.reference_loss = cfg.reference_loss.value_or(known_minimum.value_or(r.best_loss));
  r.thresholds = time_to_thresholds(trace.rows, r.initial_loss, r.reference_loss, cfg.thresholds);
  r.pushes = trace.pushes;
  r.updates = trace.updates;
  r.computes = trace.computes;
  r.sim_time_s = trace.end_time_s;
  r.comm_time_s = trace.comm_time_s;
  r.throughput = trace.end_time_s > 0.0 ? static_cast<double>(trace.cost_processed) / trace.end_time_s : 0.0;
  return r;
}

inline nlohmann::json summary_to_json(const SummaryReport& r, const ExperimentConfig& cfg) {
  using nlohmann::json;
  json config = json::object();
  for (const auto& [k, v] : config_to_pairs(cfg)) config[k] = v;
  json hist = json::object();
  for (const auto& [s, c] : r.staleness_histogram) hist[std::to_string(s)] = c;
  json th = json::array();
  for (const auto& t : r.thresholds) {
    th.push_back({{"fraction", t.fraction},
                  {"level", t.level},
                  {"time_s", t.time_s ? json(*t.time_s) : json(nullptr)},
                  {"update", t.update ? json(*t.update) : json(nullptr)}});
  }
  return json{{"schema", kSummarySchema},
              {"status", r.status == sim::RunStatus::kOk ? "ok" : "diverged"},
              {"diagnostic", r.diagnostic},
              {"config", config},
              {"mean_staleness", r.mean_staleness},
              {"staleness_histogram", hist},
              {"initial_loss", r.initial_loss},
              {"final_loss", r.final_loss},
              {"best_loss", r.best_loss},
              {"reference_loss", r.reference_loss},
              {"thresholds", th},
              {"pushes", r.pushes},
              {"updates", r.updates},
              {"computes", r.computes},
              {"sim_time_s", r.sim_time_s},
              {"comm_time_s", r.comm_time_s},
              {"throughput_cost_per_s", r.throughput}};
}

}  // namespace asgd::harness
