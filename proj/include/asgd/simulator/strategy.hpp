// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "asgd/core/error.hpp"

namespace asgd::sim {

/// All workers compute, one combined update per round behind a barrier.
struct Sync {
  friend bool operator==(const Sync&, const Sync&) = default;
};
/// Barrier rounds, but workers re-pull parameters only once every
/// `pull_every` updates.
struct SyncStale {
  std::uint64_t pull_every = 1;
  friend bool operator==(const SyncStale&, const SyncStale&) = default;
};
/// Every push is applied immediately.
struct Async {
  friend bool operator==(const Async&, const Async&) = default;
};
/// Each worker sums `local` minibatch gradients before pushing.
struct LocalAccum {
  std::uint64_t local = 1;
  friend bool operator==(const LocalAccum&, const LocalAccum&) = default;
};
/// The server holds `global` pushes before running the optimizer.
struct GlobalAccum {
  std::uint64_t global = 1;
  friend bool operator==(const GlobalAccum&, const GlobalAccum&) = default;
};
struct Combined {
  std::uint64_t local = 1;
  std::uint64_t global = 1;
  friend bool operator==(const Combined&, const Combined&) = default;
};

using Strategy = std::variant<Sync, SyncStale, Async, LocalAccum, GlobalAccum, Combined>;

inline bool is_barrier(const Strategy& s) {
  return std::holds_alternative<Sync>(s) || std::holds_alternative<SyncStale>(s);
}

inline std::uint64_t local_steps(const Strategy& s) {
  if (const auto* l = std::get_if<LocalAccum>(&s)) return l->local;
  if (const auto* c = std::get_if<Combined>(&s)) return c->local;
  return 1;
}

/// Pushes the server collects per optimizer update. Barrier strategies
/// collect one push per worker.
inline std::uint64_t global_steps(const Strategy& s, std::uint64_t workers) {
  if (is_barrier(s)) return workers;
  if (const auto* g = std::get_if<GlobalAccum>(&s)) return g->global;
  if (const auto* c = std::get_if<Combined>(&s)) return c->global;
  return 1;
}

inline std::uint64_t pull_every(const Strategy& s) {
  if (const auto* st = std::get_if<SyncStale>(&s)) return st->pull_every;
  return 1;
}

/// Minibatches folded into one optimizer update.
inline std::uint64_t batch_multiplier(const Strategy& s, std::uint64_t workers) {
  return local_steps(s) * global_steps(s, workers);
}

inline void validate(const Strategy& s) {
  if (const auto* st = std::get_if<SyncStale>(&s); st && st->pull_every < 1) {
    throw InvalidArgument("strategy.pull_every must satisfy U >= 1");
  }
  if (const auto* l = std::get_if<LocalAccum>(&s); l && l->local < 1) {
    throw InvalidArgument("strategy.local must satisfy L >= 1");
  }
  if (const auto* g = std::get_if<GlobalAccum>(&s); g && g->global < 1) {
    throw InvalidArgument("strategy.global must satisfy G >= 1");
  }
  if (const auto* c = std::get_if<Combined>(&s)) {
    if (c->local < 1) throw InvalidArgument("strategy.local must satisfy L >= 1");
    if (c->global < 1) throw InvalidArgument("strategy.global must satisfy G >= 1");
  }
}

inline const char* kind_name(const Strategy& s) {
  constexpr const char* names[] = {"sync", "sync_stale", "async", "local_accum", "global_accum", "combined"};
  return names[s.index()];
}

/// Compact comma-free label used in trace files, e.g. "combined:2:2".
inline std::string label(const Strategy& s) {
  std::string out = kind_name(s);
  if (const auto* st = std::get_if<SyncStale>(&s)) out += ":" + std::to_string(st->pull_every);
  if (const auto* l = std::get_if<LocalAccum>(&s)) out += ":" + std::to_string(l->local);
  if (const auto* g = std::get_if<GlobalAccum>(&s)) out += ":" + std::to_string(g->global);
  if (const auto* c = std::get_if<Combined>(&s)) {
    out += ":" + std::to_string(c->local) + ":" + std::to_string(c->global);
  }
  return out;
}

}  // namespace asgd::sim
