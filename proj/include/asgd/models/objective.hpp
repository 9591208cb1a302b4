// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "asgd/core/error.hpp"
#include "asgd/core/rng.hpp"
#include "asgd/core/vector.hpp"
#include "asgd/models/sample.hpp"

namespace asgd::models {

/// f(theta) = 1/2 (theta - theta*)^T A (theta - theta*), A symmetric positive
/// definite, stored row-major. Samples only contribute their cost: gradient
/// noise is injected analytically with per-coordinate std
/// noise_sigma / sqrt(batch cost).
struct Quadratic {
  std::vector<double> a;
  ParamVector theta_star;
  double noise_sigma = 0.0;

  std::size_t dim() const noexcept { return theta_star.dim(); }
  double a_at(std::size_t r, std::size_t c) const noexcept { return a[r * dim() + c]; }
};

/// Least squares: mean over samples of 1/2 (theta^T x - y)^2.
struct LinReg {
  std::size_t features = 0;
};

/// One hidden tanh layer with softmax cross-entropy output. Parameter layout:
/// W1 (hidden x inputs), b1 (hidden), W2 (classes x hidden), b2 (classes).
struct Mlp {
  std::size_t inputs = 0;
  std::size_t hidden = 0;
  std::size_t classes = 0;

  std::size_t param_count() const noexcept {
    return hidden * inputs + hidden + classes * hidden + classes;
  }
};

using Objective = std::variant<Quadratic, LinReg, Mlp>;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

inline std::size_t param_dim(const Objective& obj) {
  return std::visit(Overloaded{[](const Quadratic& q) { return q.dim(); },
                               [](const LinReg& l) { return l.features; },
                               [](const Mlp& m) { return m.param_count(); }},
                    obj);
}

/// Minimum loss when it is known in closed form.
inline std::optional<double> known_min(const Objective& obj) {
  if (std::holds_alternative<Quadratic>(obj)) return 0.0;
  return std::nullopt;
}

namespace detail {

inline void check_dim(const Objective& obj, const ParamVector& theta) {
  const std::size_t d = param_dim(obj);
  if (theta.dim() != d) throw DimensionMismatch(d, theta.dim());
}

inline void check_features(const Sample& s, std::size_t want) {
  if (s.features.size() != want) throw DimensionMismatch(want, s.features.size());
}

// Forward pass of the MLP for one sample. Fills hidden activations and
// softmax probabilities; returns the cross-entropy.
inline double mlp_forward(const Mlp& m, const ParamVector& theta, const Sample& s,
                          std::vector<double>& h, std::vector<double>& p) {
  const std::size_t w1 = 0;
  const std::size_t b1 = w1 + m.hidden * m.inputs;
  const std::size_t w2 = b1 + m.hidden;
  const std::size_t b2 = w2 + m.classes * m.hidden;
  h.assign(m.hidden, 0.0);
  p.assign(m.classes, 0.0);
  for (std::size_t j = 0; j < m.hidden; ++j) {
    double z = theta[b1 + j];
    for (std::size_t i = 0; i < m.inputs; ++i) z += theta[w1 + j * m.inputs + i] * s.features[i];
    h[j] = std::tanh(z);
  }
  double zmax = -INFINITY;
  for (std::size_t k = 0; k < m.classes; ++k) {
    double z = theta[b2 + k];
    for (std::size_t j = 0; j < m.hidden; ++j) z += theta[w2 + k * m.hidden + j] * h[j];
    p[k] = z;
    zmax = std::max(zmax, z);
  }
  double sum = 0.0;
  for (double& z : p) {
    z = std::exp(z - zmax);
    sum += z;
  }
  for (double& z : p) z /= sum;
  const auto label = static_cast<std::size_t>(s.target);
  if (label >= m.classes) throw InvalidArgument("class id out of range");
  return -std::log(std::max(p[label], 1e-300));
}

}  // namespace detail

/// Mean per-sample loss. The quadratic ignores samples.
inline double loss(const Objective& obj, const ParamVector& theta, const Batch& batch) {
  detail::check_dim(obj, theta);
  return std::visit(
      Overloaded{
          [&](const Quadratic& q) {
            const std::size_t d = q.dim();
            double f = 0.0;
            for (std::size_t r = 0; r < d; ++r) {
              const double er = theta[r] - q.theta_star[r];
              double row = 0.0;
              for (std::size_t c = 0; c < d; ++c) row += q.a_at(r, c) * (theta[c] - q.theta_star[c]);
              f += er * row;
            }
            return 0.5 * f;
          },
          [&](const LinReg& l) {
            if (batch.samples.empty()) throw InvalidArgument("empty batch");
            double f = 0.0;
            for (const auto& s : batch.samples) {
              detail::check_features(s, l.features);
              double r = -s.target;
              for (std::size_t i = 0; i < l.features; ++i) r += theta[i] * s.features[i];
              f += 0.5 * r * r;
            }
            return f / static_cast<double>(batch.samples.size());
          },
          [&](const Mlp& m) {
            if (batch.samples.empty()) throw InvalidArgument("empty batch");
            std::vector<double> h, p;
            double f = 0.0;
            for (const auto& s : batch.samples) {
              detail::check_features(s, m.inputs);
              f += detail::mlp_forward(m, theta, s, h, p);
            }
            return f / static_cast<double>(batch.samples.size());
          }},
      obj);
}

/// Noise-free mean per-sample gradient.
inline ParamVector exact_grad(const Objective& obj, const ParamVector& theta, const Batch& batch) {
  detail::check_dim(obj, theta);
  ParamVector g(theta.dim());
  std::visit(
      Overloaded{
          [&](const Quadratic& q) {
            const std::size_t d = q.dim();
            for (std::size_t r = 0; r < d; ++r) {
              double row = 0.0;
              for (std::size_t c = 0; c < d; ++c) row += q.a_at(r, c) * (theta[c] - q.theta_star[c]);
              g[r] = row;
            }
          },
          [&](const LinReg& l) {
            if (batch.samples.empty()) throw InvalidArgument("empty batch");
            for (const auto& s : batch.samples) {
              detail::check_features(s, l.features);
              double r = -s.target;
              for (std::size_t i = 0; i < l.features; ++i) r += theta[i] * s.features[i];
              for (std::size_t i = 0; i < l.features; ++i) g[i] += r * s.features[i];
            }
            g *= 1.0 / static_cast<double>(batch.samples.size());
          },
          [&](const Mlp& m) {
            if (batch.samples.empty()) throw InvalidArgument("empty batch");
            const std::size_t w1 = 0;
            const std::size_t b1 = w1 + m.hidden * m.inputs;
            const std::size_t w2 = b1 + m.hidden;
            const std::size_t b2 = w2 + m.classes * m.hidden;
            std::vector<double> h, p, dh(m.hidden);
            for (const auto& s : batch.samples) {
              detail::check_features(s, m.inputs);
              detail::mlp_forward(m, theta, s, h, p);
              p[static_cast<std::size_t>(s.target)] -= 1.0;  // dL/dz2
              std::fill(dh.begin(), dh.end(), 0.0);
              for (std::size_t k = 0; k < m.classes; ++k) {
                g[b2 + k] += p[k];
                for (std::size_t j = 0; j < m.hidden; ++j) {
                  g[w2 + k * m.hidden + j] += p[k] * h[j];
                  dh[j] += p[k] * theta[w2 + k * m.hidden + j];
                }
              }
              for (std::size_t j = 0; j < m.hidden; ++j) {
                const double dz = dh[j] * (1.0 - h[j] * h[j]);
                g[b1 + j] += dz;
                for (std::size_t i = 0; i < m.inputs; ++i) g[w1 + j * m.inputs + i] += dz * s.features[i];
              }
            }
            g *= 1.0 / static_cast<double>(batch.samples.size());
          }},
      obj);
  return g;
}

/// Stochastic gradient. Data-driven objectives are noisy through their
/// samples; the quadratic adds N(0, noise_sigma^2 / batch cost) per
/// coordinate, drawn from `rng`.
inline ParamVector grad(const Objective& obj, const ParamVector& theta, const Batch& batch, RngStream& rng) {
  ParamVector g = exact_grad(obj, theta, batch);
  if (const auto* q = std::get_if<Quadratic>(&obj); q && q->noise_sigma > 0.0) {
    if (batch.total_cost < 1) throw InvalidArgument("batch cost must be >= 1");
    const double sd = q->noise_sigma / std::sqrt(static_cast<double>(batch.total_cost));
    for (double& x : g) x += sd * rng.normal();
  }
  return g;
}

/// Central differences of loss(); the oracle for exact_grad.
inline ParamVector finite_diff_grad(const Objective& obj, const ParamVector& theta, const Batch& batch, double h) {
  if (!(h > 0.0)) throw InvalidArgument("finite-difference step must be > 0");
  detail::check_dim(obj, theta);
  ParamVector g(theta.dim());
  ParamVector probe = theta;
  for (std::size_t i = 0; i < theta.dim(); ++i) {
    probe[i] = theta[i] + h;
    const double up = loss(obj, probe, batch);
    probe[i] = theta[i] - h;
    const double down = loss(obj, probe, batch);
    probe[i] = theta[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

}  // namespace asgd::models
