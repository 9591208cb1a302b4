// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <barrier>
#include <chrono>
#include <cstdint>
#include <mutex>
#include <thread>
#include <vector>

#include "asgd/simulator/problem.hpp"

namespace asgd::sim {

namespace detail {

// DataCursor shared between threads.
class SharedCursor {
 public:
  explicit SharedCursor(std::size_t batches) : inner_(batches) {}
  std::size_t next() {
    std::lock_guard lock(mu_);
    return inner_.next();
  }

 private:
  std::mutex mu_;
  DataCursor inner_;
};

inline double claim_batch(WorkerState& w, std::span<const models::Batch> batches, SharedCursor& cursor,
                          const ComputeTimeModel& model, std::int64_t budget) {
  w.pending_batch = cursor.next();
  const double scale = static_cast<double>(batches[w.pending_batch].total_cost) / static_cast<double>(budget);
  w.pending_duration = sample_compute_time(w.time_rng, model) * scale;
  return w.pending_duration;
}

inline void pause(double sim_seconds, double time_scale) {
  if (time_scale > 0.0) std::this_thread::sleep_for(std::chrono::duration<double>(sim_seconds * time_scale));
}

}  // namespace detail

/// Threaded executor over the same server state machine. Each worker runs
/// on its own thread, sleeps `parallel_time_scale` wall seconds per
/// simulated compute second, computes real gradients, and pushes under a
/// mutex. Trace rows use each worker's own simulated clock. Row order depends
/// on the OS scheduler, so only statistical properties are reproducible
/// with N > 1.
inline RunTrace run_parallel(const ExperimentConfig& cfg) {
  cfg.validate();
  const Problem p = build_problem(cfg);
  ServerState server(p.initial, global_steps(cfg.strategy, cfg.workers), cfg.optimizer);
  std::vector<WorkerState> workers;
  workers.reserve(cfg.workers);
  for (std::uint64_t i = 0; i < cfg.workers; ++i) workers.emplace_back(i, cfg.seed, p.initial.dim());

  RunTrace trace;
  PushRecorder rec(cfg, p, server, trace);
  std::mutex server_mu;
  std::atomic<bool> stop{false};
  detail::SharedCursor cursor(p.batches.size());
  const std::uint64_t local = local_steps(cfg.strategy);
  const std::uint64_t n = cfg.workers;

  auto account = [&](const WorkerState& w) {
    ++trace.computes;
    trace.cost_processed += p.batches[w.pending_batch].total_cost;
    trace.end_time_s = std::max(trace.end_time_s, w.next_free_time);
  };

  if (is_barrier(cfg.strategy)) {
    const std::uint64_t period = pull_every(cfg.strategy);
    std::vector<std::optional<GradientMsg>> slots(n);
    double round_start = 0.0;
    auto finish_round = [&]() noexcept {
      if (stop.load()) return;
      double longest = 0.0;
      for (const auto& w : workers) longest = std::max(longest, w.pending_duration);
      const double end = round_start + longest + cfg.latency;
      if (cfg.max_time > 0.0 && end > cfg.max_time) {
        stop = true;
        return;
      }
      for (std::uint64_t i = 0; i < n; ++i) {
        workers[i].next_free_time = end;
        account(workers[i]);
        slots[i]->push_time = end;
        trace.comm_time_s += cfg.latency;
        if (!rec.push(*slots[i])) {
          stop = true;
          return;
        }
      }
      round_start = end;
      if (server.version % period == 0) {
        for (auto& w : workers) w.pull(server);
      }
      if (rec.budget_exhausted()) stop = true;
    };
    std::barrier sync_point(static_cast<std::ptrdiff_t>(n), finish_round);
    for (auto& w : workers) w.pull(server);

    std::vector<std::jthread> threads;
    for (std::uint64_t i = 0; i < n; ++i) {
      threads.emplace_back([&, i] {
        WorkerState& w = workers[i];
        while (!stop.load()) {
          const double d = detail::claim_batch(w, p.batches, cursor, cfg.compute, cfg.batch_budget);
          detail::pause(d, cfg.parallel_time_scale);
          slots[i] = worker_cycle(w, p.objective, p.batches, 1, cfg.combine, 0.0);
          sync_point.arrive_and_wait();
        }
      });
    }
    threads.clear();
    return trace;
  }

  std::vector<std::jthread> threads;
  for (std::uint64_t i = 0; i < n; ++i) {
    threads.emplace_back([&, i] {
      WorkerState& w = workers[i];
      double clock = cfg.stagger ? mean_time(cfg.compute) * static_cast<double>(i) / static_cast<double>(n) : 0.0;
      detail::pause(clock, cfg.parallel_time_scale);
      {
        std::lock_guard lock(server_mu);
        w.pull(server);
      }
      while (!stop.load()) {
        const bool pushing = w.will_push(local);
        const double d = detail::claim_batch(w, p.batches, cursor, cfg.compute, cfg.batch_budget);
        detail::pause(d, cfg.parallel_time_scale);
        clock += d + (pushing ? cfg.latency : 0.0);
        w.next_free_time = clock;
        auto msg = worker_cycle(w, p.objective, p.batches, local, cfg.combine, clock);

        std::lock_guard lock(server_mu);
        if (stop.load()) break;
        if (cfg.max_time > 0.0 && clock > cfg.max_time) {
          stop = true;
          break;
        }
        account(w);
        if (msg) {
          trace.comm_time_s += cfg.latency;
          if (!rec.push(*msg) || rec.budget_exhausted()) {
            stop = true;
            break;
          }
          w.pull(server);
        }
      }
    });
  }
  threads.clear();
  return trace;
}

}  // namespace asgd::sim
