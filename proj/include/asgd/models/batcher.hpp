// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "asgd/core/error.hpp"
#include "asgd/models/sample.hpp"

namespace asgd::models {

/// Greedy memory-budget batching in dataset order: a sample joins the open
/// batch iff the batch cost stays within `budget`; otherwise a new batch
/// starts with it.
inline std::vector<Batch> dynamic_batcher(std::span<const Sample> dataset, std::int64_t budget) {
  if (budget < 1) throw InvalidArgument("batch budget must be >= 1");
  std::vector<Batch> out;
  Batch current;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const Sample& s = dataset[i];
    if (s.cost < 1) throw InvalidArgument("sample " + std::to_string(i) + " has cost < 1");
    if (s.cost > budget) {
      throw InvalidArgument("sample " + std::to_string(i) + " cost " + std::to_string(s.cost) +
                            " exceeds batch budget " + std::to_string(budget));
    }
    if (!current.samples.empty() && current.total_cost + s.cost > budget) {
      out.push_back(std::move(current));
      current = Batch{};
    }
    current.samples.push_back(s);
    current.total_cost += s.cost;
  }
  if (!current.samples.empty()) out.push_back(std::move(current));
  return out;
}

}  // namespace asgd::models
