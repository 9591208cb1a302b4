// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>

#include "asgd/core/error.hpp"
#include "asgd/core/schedule.hpp"
#include "asgd/core/vector.hpp"
#include "asgd/optim/adam.hpp"
#include "asgd/optim/sgd.hpp"
#include "asgd/simulator/experiment_config.hpp"

namespace asgd::sim {

/// A pushed gradient tagged with the server version it was computed from.
struct GradientMsg {
  ParamVector grad;
  std::uint64_t worker = 0;
  std::uint64_t pull_version = 0;
  double push_time = 0.0;
  std::int64_t cost = 0;
};

/// Update rule shared by all strategies: optimizer choice plus schedule.
struct UpdateRule {
  OptimizerKind optimizer = OptimizerKind::kAdam;
  optim::AdamConfig adam;
  LrSchedule lr;
  CombineMode combine = CombineMode::kMean;
  double batch_multiplier = 1.0;
};

struct ServerState {
  ParamVector theta;
  std::uint64_t version = 0;  // optimizer updates applied
  ParamVector accum_buffer;
  std::uint64_t accum_count = 0;
  std::uint64_t global = 1;  // pushes per update
  std::optional<optim::AdamState> adam;
  std::uint64_t total_pushes = 0;
  double last_lr = 0.0;

  ServerState() = default;
  ServerState(ParamVector initial, std::uint64_t global_steps, OptimizerKind optimizer)
      : theta(std::move(initial)), accum_buffer(theta.dim()), global(global_steps) {
    if (global < 1) throw InvalidArgument("global accumulation G must be >= 1");
    if (optimizer == OptimizerKind::kAdam) adam.emplace(theta.dim());
  }
};

struct PushOutcome {
  std::uint64_t staleness = 0;
  bool updated = false;
};

/// Records staleness, folds the gradient into the buffer and, once `global`
/// pushes are held, applies one optimizer step on their mean (or sum).
/// Throws NonFinite on a non-finite gradient or resulting parameter; the
/// state is left as it was before the call in that case.
inline PushOutcome server_on_push(ServerState& s, const GradientMsg& msg, const UpdateRule& rule) {
  if (msg.pull_version > s.version) throw InvalidArgument("gradient pulled from a future version");
  if (!msg.grad.is_finite()) throw NonFinite("non-finite gradient from worker " + std::to_string(msg.worker));
  s.theta.check_same_dim(msg.grad);

  PushOutcome out;
  out.staleness = s.version - msg.pull_version;
  if (s.accum_count + 1 < s.global) {
    s.accum_buffer += msg.grad;
    ++s.accum_count;
    ++s.total_pushes;
    return out;
  }

  ParamVector g = s.accum_buffer + msg.grad;
  if (rule.combine == CombineMode::kMean) g *= 1.0 / static_cast<double>(s.global);
  const double lr = lr_at(rule.lr, s.version + 1, rule.batch_multiplier);

  ParamVector next;
  std::optional<optim::AdamState> next_adam;
  if (rule.optimizer == OptimizerKind::kAdam) {
    auto [st, th] = optim::adam_step(*s.adam, rule.adam, s.theta, g, lr);
    next_adam = std::move(st);
    next = std::move(th);
  } else {
    next = optim::sgd_step(s.theta, g, lr);
  }
  if (!next.is_finite()) throw NonFinite("parameters became non-finite at update " + std::to_string(s.version + 1));

  s.theta = std::move(next);
  if (next_adam) s.adam = std::move(next_adam);
  s.accum_buffer.fill(0.0);
  s.accum_count = 0;
  ++s.version;
  ++s.total_pushes;
  s.last_lr = lr;
  out.updated = true;
  return out;
}

}  // namespace asgd::sim
