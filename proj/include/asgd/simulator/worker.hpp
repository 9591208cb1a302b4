// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "asgd/core/compute_time.hpp"
#include "asgd/core/rng.hpp"
#include "asgd/core/vector.hpp"
#include "asgd/models/objective.hpp"
#include "asgd/simulator/server.hpp"

namespace asgd::sim {

// Stream ids derived from the run seed.
inline constexpr std::uint64_t kDataStream = 1;
inline std::uint64_t time_stream(std::uint64_t worker) { return 1000 + 2 * worker; }
inline std::uint64_t noise_stream(std::uint64_t worker) { return 1001 + 2 * worker; }

/// Round-robin cursor over the pre-built batches.
class DataCursor {
 public:
  explicit DataCursor(std::size_t batches) : count_(batches) {
    if (count_ == 0) throw InvalidArgument("data set produced no batches");
  }
  std::size_t next() noexcept {
    const std::size_t i = pos_;
    pos_ = (pos_ + 1) % count_;
    return i;
  }

 private:
  std::size_t count_;
  std::size_t pos_ = 0;
};

struct WorkerState {
  std::uint64_t id = 0;
  ParamVector theta_local;
  std::uint64_t pulled_version = 0;
  ParamVector local_buffer;
  std::uint64_t local_count = 0;
  std::int64_t local_cost = 0;
  RngStream time_rng;
  RngStream noise_rng;
  double next_free_time = 0.0;
  std::size_t pending_batch = 0;
  double pending_duration = 0.0;

  WorkerState(std::uint64_t worker_id, std::uint64_t seed, std::size_t dim)
      : id(worker_id),
        theta_local(dim),
        local_buffer(dim),
        time_rng(seed, time_stream(worker_id)),
        noise_rng(seed, noise_stream(worker_id)) {}

  void pull(const ServerState& s) {
    theta_local = s.theta;
    pulled_version = s.version;
  }

  bool will_push(std::uint64_t local_steps) const noexcept { return local_count + 1 >= local_steps; }
};

/// Claims the next batch and draws its compute duration, which scales the
/// sampled time by batch cost relative to the full budget.
inline double begin_compute(WorkerState& w, std::span<const models::Batch> batches, DataCursor& cursor,
                            const ComputeTimeModel& model, std::int64_t budget) {
  w.pending_batch = cursor.next();
  const double scale = static_cast<double>(batches[w.pending_batch].total_cost) / static_cast<double>(budget);
  w.pending_duration = sample_compute_time(w.time_rng, model) * scale;
  return w.pending_duration;
}

/// Finishes the pending compute: one gradient against theta_local is added
/// to the local buffer. After `local_steps` computes a message carrying the
/// buffer (divided by local_steps in mean mode) is returned and the buffer
/// resets.
inline std::optional<GradientMsg> worker_cycle(WorkerState& w, const models::Objective& obj,
                                               std::span<const models::Batch> batches, std::uint64_t local_steps,
                                               CombineMode combine, double now) {
  const models::Batch& batch = batches[w.pending_batch];
  w.local_buffer += models::grad(obj, w.theta_local, batch, w.noise_rng);
  w.local_cost += batch.total_cost;
  ++w.local_count;
  if (w.local_count < local_steps) return std::nullopt;

  GradientMsg msg;
  msg.grad = w.local_buffer;
  if (combine == CombineMode::kMean && local_steps > 1) msg.grad *= 1.0 / static_cast<double>(local_steps);
  msg.worker = w.id;
  msg.pull_version = w.pulled_version;
  msg.push_time = now;
  msg.cost = w.local_cost;
  w.local_buffer.fill(0.0);
  w.local_count = 0;
  w.local_cost = 0;
  return msg;
}

}  // namespace asgd::sim
