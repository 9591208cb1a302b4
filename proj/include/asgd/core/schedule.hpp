// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "asgd/core/error.hpp"

namespace asgd {

enum class LrDecay { kNone, kInverseSqrt };

/// Linear warmup followed by optional inverse square root decay.
///
/// The warmup interpolation is an assumption: the factor is min(t/W, sqrt(W/t))
/// with inverse-sqrt decay and min(t/W, 1) without. W = 0 disables warmup and
/// decay both, giving a constant rate.
///
/// batch_scale_factor implements the linear batch-size scaling rule: when it
/// is positive the rate is multiplied by batch_scale_factor * multiplier, where
/// multiplier is the number of minibatches folded into one update.
struct LrSchedule {
  double base_lr = 1e-3;
  std::uint64_t warmup_updates = 0;
  LrDecay decay = LrDecay::kNone;
  double batch_scale_factor = 0.0;

  void validate() const {
    if (!(base_lr > 0.0) || !std::isfinite(base_lr)) throw InvalidArgument("lr.base must be > 0");
    if (!(batch_scale_factor >= 0.0)) throw InvalidArgument("lr.batch_scale must be >= 0");
  }

  friend bool operator==(const LrSchedule&, const LrSchedule&) = default;
};

inline double batch_scale(const LrSchedule& s, double multiplier) {
  return s.batch_scale_factor > 0.0 ? s.batch_scale_factor * multiplier : 1.0;
}

/// Learning rate for update t (1-based).
inline double lr_at(const LrSchedule& s, std::uint64_t t, double multiplier = 1.0) {
  const double scale = s.base_lr * batch_scale(s, multiplier);
  if (s.warmup_updates == 0) return scale;
  const double w = static_cast<double>(s.warmup_updates);
  const double td = static_cast<double>(std::max<std::uint64_t>(t, 1));
  const double tail = s.decay == LrDecay::kInverseSqrt ? std::sqrt(w / td) : 1.0;
  return scale * std::min(td / w, tail);
}

}  // namespace asgd
