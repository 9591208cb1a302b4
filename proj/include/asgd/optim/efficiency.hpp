// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>

#include "asgd/core/error.hpp"
#include "asgd/optim/adam.hpp"

namespace asgd::optim {

/// Summary statistics of a scalar gradient stream. `count` independent
/// samples are summed into each gradient the optimizer sees.
struct GradStreamStats {
  double mean = 0.0;
  double variance = 0.0;
  std::uint64_t count = 1;
};

/// Predicted long-run |m_hat / sqrt(v_hat)| for a stationary stream:
/// 1 / sqrt(Var/E^2 + 1), where Var/E^2 is the squared coefficient of
/// variation. Summing `count` samples divides the squared CoV by `count`.
///
/// The prediction replaces Adam's exponential averages by expectations, so
/// it is an approximation; finite beta windows add a few percent of bias.
inline double predicted_efficiency(const GradStreamStats& stats) {
  if (stats.mean == 0.0) throw InvalidArgument("efficiency undefined for a zero-mean stream");
  if (stats.variance < 0.0) throw InvalidArgument("variance must be >= 0");
  if (stats.count < 1) throw InvalidArgument("count must be >= 1");
  const double cov2 = stats.variance / (stats.mean * stats.mean) / static_cast<double>(stats.count);
  return 1.0 / std::sqrt(cov2 + 1.0);
}

/// Feeds `steps` scalar gradients through Adam and returns the mean of
/// |adam_direction| over steps after `burn_in`. Each gradient is the sum of
/// `sum_k` consecutive draws from `sample`.
inline double empirical_efficiency(const std::function<double()>& sample, std::uint64_t steps,
                                   const AdamConfig& cfg, std::uint64_t sum_k = 1,
                                   std::uint64_t burn_in = 1000) {
  AdamState state(1);
  ParamVector theta(1), g(1);
  double acc = 0.0;
  for (std::uint64_t t = 1; t <= steps + burn_in; ++t) {
    g[0] = 0.0;
    for (std::uint64_t k = 0; k < sum_k; ++k) g[0] += sample();
    auto [next, unused] = adam_step(state, cfg, theta, g);
    state = std::move(next);
    if (t > burn_in) acc += std::abs(adam_direction(state, cfg)[0]);
  }
  return acc / static_cast<double>(steps);
}

}  // namespace asgd::optim
