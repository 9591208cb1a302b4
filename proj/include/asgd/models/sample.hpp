// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

namespace asgd::models {

/// One training example. `cost` is the memory-footprint analog of a
/// sentence's token count and is always >= 1.
struct Sample {
  std::vector<double> features;
  double target = 0.0;
  std::int64_t cost = 1;

  friend bool operator==(const Sample&, const Sample&) = default;
};

/// A non-empty run of samples; total_cost is the sum of member costs.
struct Batch {
  std::vector<Sample> samples;
  std::int64_t total_cost = 0;

  friend bool operator==(const Batch&, const Batch&) = default;
};

inline Batch make_batch(std::vector<Sample> samples) {
  Batch b;
  for (const auto& s : samples) b.total_cost += s.cost;
  b.samples = std::move(samples);
  return b;
}

}  // namespace asgd::models
