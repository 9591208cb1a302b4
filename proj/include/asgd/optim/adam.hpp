// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>

#include "asgd/core/error.hpp"
#include "asgd/core/vector.hpp"

namespace asgd::optim {

/// Adam hyperparameters. Defaults use beta2 = 0.98, the NMT setting.
struct AdamConfig {
  double alpha = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double epsilon = 1e-8;

  void validate() const {
    if (!(alpha > 0.0)) throw InvalidArgument("adam.alpha must be > 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw InvalidArgument("adam.beta1 must be in [0, 1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) throw InvalidArgument("adam.beta2 must be in [0, 1)");
    if (!(epsilon >= 0.0)) throw InvalidArgument("adam.epsilon must be >= 0");
  }

  friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

/// Moment estimates after `t` completed updates.
struct AdamState {
  ParamVector m;
  ParamVector v;
  std::uint64_t t = 0;

  AdamState() = default;
  explicit AdamState(std::size_t dim) : m(dim), v(dim) {}

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

/// Bias-corrected moments of a state with t >= 1.
struct CorrectedMoments {
  ParamVector m_hat;
  ParamVector v_hat;
};

inline CorrectedMoments corrected_moments(const AdamState& s, const AdamConfig& cfg) {
  if (s.t == 0) throw InvalidArgument("bias correction needs at least one completed step");
  const double t = static_cast<double>(s.t);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  CorrectedMoments out{ParamVector(s.m.dim()), ParamVector(s.v.dim())};
  for (std::size_t i = 0; i < s.m.dim(); ++i) {
    out.m_hat[i] = s.m[i] / c1;
    out.v_hat[i] = s.v[i] / c2;
  }
  return out;
}

/// Unit-learning-rate update direction m_hat / (sqrt(v_hat) + eps).
inline ParamVector adam_direction(const AdamState& s, const AdamConfig& cfg) {
  auto [m_hat, v_hat] = corrected_moments(s, cfg);
  ParamVector dir(m_hat.dim());
  for (std::size_t i = 0; i < dir.dim(); ++i) {
    const double denom = std::sqrt(v_hat[i]) + cfg.epsilon;
    // 0/0 only when the coordinate has seen nothing but zero gradients.
    dir[i] = denom == 0.0 ? 0.0 : m_hat[i] / denom;
  }
  return dir;
}

/// One Adam update. `lr_override`, when set, replaces cfg.alpha for this step.
inline std::pair<AdamState, ParamVector> adam_step(const AdamState& state, const AdamConfig& cfg,
                                                   const ParamVector& theta, const ParamVector& g,
                                                   std::optional<double> lr_override = std::nullopt) {
  theta.check_same_dim(g);
  if (!g.is_finite()) throw NonFinite("non-finite gradient passed to adam_step");
  AdamState next = state;
  if (next.m.dim() == 0 && state.t == 0) next = AdamState(theta.dim());
  theta.check_same_dim(next.m);
  theta.check_same_dim(next.v);

  const double b1 = cfg.beta1;
  const double b2 = cfg.beta2;
  for (std::size_t i = 0; i < g.dim(); ++i) {
    next.m[i] = b1 * next.m[i] + (1.0 - b1) * g[i];
    next.v[i] = b2 * next.v[i] + (1.0 - b2) * g[i] * g[i];
  }
  next.t = state.t + 1;

  const double lr = lr_override.value_or(cfg.alpha);
  const ParamVector dir = adam_direction(next, cfg);
  return {std::move(next), vec_axpy(-lr, dir, theta)};
}

}  // namespace asgd::optim
