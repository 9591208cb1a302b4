// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <vector>

#include "asgd/core/rng.hpp"
#include "asgd/models/batcher.hpp"
#include "asgd/models/factory.hpp"
#include "asgd/models/objective.hpp"
#include "asgd/simulator/experiment_config.hpp"
#include "asgd/simulator/server.hpp"
#include "asgd/simulator/trace.hpp"
#include "asgd/simulator/worker.hpp"

namespace asgd::sim {

/// Objective, training batches, probe set and starting point of a run.
struct Problem {
  models::Objective objective;
  std::vector<models::Batch> batches;
  models::Batch probe;
  ParamVector initial;
};

inline constexpr std::uint64_t kProbeStream = 2;

inline Problem build_problem(const ExperimentConfig& cfg) {
  Problem p;
  p.objective = models::make_objective(cfg.objective);
  RngStream data_rng(cfg.seed, kDataStream);
  const auto samples =
      models::generate_samples(cfg.objective, cfg.data.samples, cfg.data.cost_min, cfg.data.cost_max, data_rng);
  p.batches = models::dynamic_batcher(samples, cfg.batch_budget);
  RngStream probe_rng(cfg.data.probe_seed, kProbeStream);
  p.probe = models::make_batch(models::generate_samples(cfg.objective, cfg.data.probe_samples, cfg.data.cost_min,
                                                        cfg.data.cost_max, probe_rng));
  p.initial = models::initial_theta(cfg.objective);
  return p;
}

inline UpdateRule make_update_rule(const ExperimentConfig& cfg) {
  UpdateRule rule;
  rule.optimizer = cfg.optimizer;
  rule.adam = cfg.adam;
  rule.adam.alpha = cfg.lr.base_lr;
  rule.lr = cfg.lr;
  rule.combine = cfg.combine;
  rule.batch_multiplier = static_cast<double>(batch_multiplier(cfg.strategy, cfg.workers));
  return rule;
}

/// Server-side bookkeeping common to the simulated and threaded executors:
/// applies a push, refreshes the probe loss and appends the trace row.
class PushRecorder {
 public:
  PushRecorder(const ExperimentConfig& cfg, const Problem& problem, ServerState& server, RunTrace& trace)
      : cfg_(cfg), problem_(problem), server_(server), trace_(trace), rule_(make_update_rule(cfg)),
        label_(label(cfg.strategy)) {
    loss_ = models::loss(problem.objective, server.theta, problem.probe);
    trace_.initial_loss = loss_;
    trace_.warmup_pushes = cfg.warmup_pushes();
    trace_.final_theta = server.theta;
  }

  /// Returns false when the run must stop because it diverged.
  bool push(const GradientMsg& msg) {
    PushOutcome out;
    try {
      out = server_on_push(server_, msg, rule_);
    } catch (const NonFinite& e) {
      return diverge(e.what());
    }
    if (out.updated && server_.version % cfg_.probe_every == 0) {
      const double l = models::loss(problem_.objective, server_.theta, problem_.probe);
      if (!std::isfinite(l)) return diverge("probe loss became non-finite");
      loss_ = l;
    }
    TraceRow row;
    row.update_idx = server_.version;
    row.sim_time_s = msg.push_time;
    row.pushes = server_.total_pushes;
    row.staleness = out.staleness;
    row.loss_probe = loss_;
    row.lr = server_.version == 0 ? lr_at(rule_.lr, 1, rule_.batch_multiplier) : server_.last_lr;
    row.strategy = label_;
    row.worker_id = msg.worker;
    trace_.rows.push_back(std::move(row));
    trace_.pushes = server_.total_pushes;
    trace_.updates = server_.version;
    trace_.final_theta = server_.theta;
    return true;
  }

  bool budget_exhausted() const {
    if (server_.version >= cfg_.max_updates) return true;
    return cfg_.max_pushes > 0 && server_.total_pushes >= cfg_.max_pushes;
  }

 private:
  bool diverge(const std::string& why) {
    trace_.status = RunStatus::kDiverged;
    trace_.diagnostic = why;
    return false;
  }

  const ExperimentConfig& cfg_;
  const Problem& problem_;
  ServerState& server_;
  RunTrace& trace_;
  UpdateRule rule_;
  std::string label_;
  double loss_ = 0.0;
};

}  // namespace asgd::sim
