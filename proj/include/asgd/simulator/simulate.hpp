// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <queue>
#include <tuple>
#include <vector>

#include "asgd/simulator/problem.hpp"

namespace asgd::sim {

namespace detail {

struct Event {
  double time;
  std::uint64_t worker;
  bool operator>(const Event& o) const { return std::tie(time, worker) > std::tie(o.time, o.worker); }
};

inline void run_event_driven(const ExperimentConfig& cfg, const Problem& p, ServerState& server,
                             std::vector<WorkerState>& workers, PushRecorder& rec, RunTrace& trace) {
  const std::uint64_t local = local_steps(cfg.strategy);
  const std::uint64_t n = cfg.workers;
  DataCursor cursor(p.batches.size());
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events;

  auto schedule = [&](WorkerState& w, double start) {
    const double d = begin_compute(w, p.batches, cursor, cfg.compute, cfg.batch_budget);
    w.next_free_time = start + d + (w.will_push(local) ? cfg.latency : 0.0);
    events.push({w.next_free_time, w.id});
  };

  for (auto& w : workers) {
    w.pull(server);
    const double start = cfg.stagger ? mean_time(cfg.compute) * static_cast<double>(w.id) / static_cast<double>(n) : 0.0;
    schedule(w, start);
  }

  while (!events.empty()) {
    const Event ev = events.top();
    events.pop();
    if (cfg.max_time > 0.0 && ev.time > cfg.max_time) break;
    WorkerState& w = workers[ev.worker];
    trace.end_time_s = ev.time;
    ++trace.computes;
    trace.cost_processed += p.batches[w.pending_batch].total_cost;
    if (auto msg = worker_cycle(w, p.objective, p.batches, local, cfg.combine, ev.time)) {
      trace.comm_time_s += cfg.latency;
      if (!rec.push(*msg)) return;
      if (rec.budget_exhausted()) return;
      w.pull(server);
    }
    schedule(w, ev.time);
  }
}

inline void run_barrier_rounds(const ExperimentConfig& cfg, const Problem& p, ServerState& server,
                               std::vector<WorkerState>& workers, PushRecorder& rec, RunTrace& trace) {
  const std::uint64_t period = pull_every(cfg.strategy);
  DataCursor cursor(p.batches.size());
  for (auto& w : workers) w.pull(server);
  double now = 0.0;
  for (;;) {
    double longest = 0.0;
    for (auto& w : workers) {
      longest = std::max(longest, begin_compute(w, p.batches, cursor, cfg.compute, cfg.batch_budget));
    }
    const double end = now + longest + cfg.latency;
    if (cfg.max_time > 0.0 && end > cfg.max_time) return;
    for (auto& w : workers) {
      ++trace.computes;
      trace.cost_processed += p.batches[w.pending_batch].total_cost;
      auto msg = worker_cycle(w, p.objective, p.batches, 1, cfg.combine, end);
      trace.comm_time_s += cfg.latency;
      if (!rec.push(*msg)) return;
    }
    now = end;
    trace.end_time_s = end;
    if (server.version % period == 0) {
      for (auto& w : workers) w.pull(server);
    }
    if (rec.budget_exhausted()) return;
  }
}

}  // namespace detail

/// Deterministic single-threaded discrete-event run.
///
/// Event-driven strategies pop the earliest compute completion (ties go to
/// the lower worker id), let the worker finish its cycle and, when it emits
/// a message, hand it to the server before the worker re-pulls. A pushing
/// compute finishes `latency` seconds later than its compute time. Barrier
/// strategies run rounds: every worker computes, the server combines all N
/// pushes into one update, and workers re-pull when the new version is a
/// multiple of the pull period.
inline RunTrace run_simulation(const ExperimentConfig& cfg) {
  cfg.validate();
  const Problem p = build_problem(cfg);
  ServerState server(p.initial, global_steps(cfg.strategy, cfg.workers), cfg.optimizer);
  std::vector<WorkerState> workers;
  workers.reserve(cfg.workers);
  for (std::uint64_t i = 0; i < cfg.workers; ++i) workers.emplace_back(i, cfg.seed, p.initial.dim());

  RunTrace trace;
  PushRecorder rec(cfg, p, server, trace);
  if (is_barrier(cfg.strategy)) {
    detail::run_barrier_rounds(cfg, p, server, workers, rec, trace);
  } else {
    detail::run_event_driven(cfg, p, server, workers, rec, trace);
  }
  return trace;
}

}  // namespace asgd::sim
