// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <type_traits>
#include <variant>

#include "asgd/core/error.hpp"
#include "asgd/core/rng.hpp"

namespace asgd {

struct ConstantTime {
  double mean = 1.0;
  friend bool operator==(const ConstantTime&, const ConstantTime&) = default;
};

/// Normal(mean, stddev) conditioned on being above mean / 10.
struct NormalTime {
  double mean = 1.0;
  double stddev = 0.1;
  friend bool operator==(const NormalTime&, const NormalTime&) = default;
};

using ComputeTimeModel = std::variant<ConstantTime, NormalTime>;

inline void validate(const ComputeTimeModel& model) {
  std::visit(
      [](const auto& m) {
        if (!(m.mean > 0.0)) throw InvalidArgument("compute.mean must be > 0");
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, NormalTime>) {
          if (!(m.stddev >= 0.0)) throw InvalidArgument("compute.stddev must be >= 0");
        }
      },
      model);
}

inline double mean_time(const ComputeTimeModel& model) {
  return std::visit([](const auto& m) { return m.mean; }, model);
}

/// Draws one simulated compute duration in seconds. Always positive.
inline double sample_compute_time(RngStream& rng, const ComputeTimeModel& model) {
  validate(model);
  if (const auto* c = std::get_if<ConstantTime>(&model)) return c->mean;
  const auto& n = std::get<NormalTime>(model);
  const double floor = n.mean / 10.0;
  for (;;) {
    const double x = rng.normal(n.mean, n.stddev);
    if (x > floor) return x;
  }
}

}  // namespace asgd
