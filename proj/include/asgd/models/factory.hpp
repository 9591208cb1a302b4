// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "asgd/core/error.hpp"
#include "asgd/core/rng.hpp"
#include "asgd/models/objective.hpp"
#include "asgd/models/sample.hpp"

namespace asgd::models {

enum class ObjectiveKind { kQuadratic, kLinReg, kMlp };

inline const char* to_string(ObjectiveKind k) {
  switch (k) {
    case ObjectiveKind::kQuadratic: return "quadratic";
    case ObjectiveKind::kLinReg: return "linreg";
    case ObjectiveKind::kMlp: return "mlp";
  }
  return "?";
}

/// Everything needed to rebuild an objective and its synthetic data.
struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::kQuadratic;
  std::size_t dim = 20;      // quadratic / linreg parameter count
  double condition = 10.0;   // quadratic eigenvalue ratio max/min
  bool rotate = true;        // quadratic: random orthogonal eigenbasis
  double noise_sigma = 1.0;  // quadratic gradient noise at unit batch cost
  double label_noise = 0.1;  // linreg target noise
  std::size_t inputs = 4;    // mlp
  std::size_t hidden = 8;
  std::size_t classes = 3;
  std::uint64_t seed = 1;

  void validate() const {
    if (kind != ObjectiveKind::kMlp && dim < 1) throw InvalidArgument("objective.dim must be >= 1");
    if (!(condition >= 1.0)) throw InvalidArgument("objective.condition must be >= 1");
    if (!(noise_sigma >= 0.0)) throw InvalidArgument("objective.noise_sigma must be >= 0");
    if (!(label_noise >= 0.0)) throw InvalidArgument("objective.label_noise must be >= 0");
    if (kind == ObjectiveKind::kMlp) {
      if (inputs < 1 || hidden < 1 || classes < 2) {
        throw InvalidArgument("mlp needs inputs >= 1, hidden >= 1, classes >= 2");
      }
      if (Mlp{inputs, hidden, classes}.param_count() > 200) {
        throw InvalidArgument("mlp is capped at 200 parameters");
      }
    }
  }

  friend bool operator==(const ObjectiveSpec&, const ObjectiveSpec&) = default;
};

/// Data-set shape: sample count and the uniform cost range.
struct DataSpec {
  std::size_t samples = 4096;
  std::int64_t cost_min = 1;
  std::int64_t cost_max = 50;
  std::size_t probe_samples = 256;
  std::uint64_t probe_seed = 7;

  void validate() const {
    if (samples < 1) throw InvalidArgument("data.samples must be >= 1");
    if (cost_min < 1 || cost_max < cost_min) throw InvalidArgument("data costs need 1 <= cost_min <= cost_max");
    if (probe_samples < 1) throw InvalidArgument("data.probe_samples must be >= 1");
  }

  friend bool operator==(const DataSpec&, const DataSpec&) = default;
};

namespace detail {

// Orthonormal basis from Gram-Schmidt on Gaussian columns.
inline std::vector<double> random_orthogonal(std::size_t d, RngStream& rng) {
  std::vector<double> q(d * d);
  for (double& x : q) x = rng.normal();
  for (std::size_t c = 0; c < d; ++c) {
    for (std::size_t p = 0; p < c; ++p) {
      double proj = 0.0;
      for (std::size_t r = 0; r < d; ++r) proj += q[r * d + c] * q[r * d + p];
      for (std::size_t r = 0; r < d; ++r) q[r * d + c] -= proj * q[r * d + p];
    }
    double n = 0.0;
    for (std::size_t r = 0; r < d; ++r) n += q[r * d + c] * q[r * d + c];
    n = std::sqrt(n);
    for (std::size_t r = 0; r < d; ++r) q[r * d + c] /= n;
  }
  return q;
}

// Stream ids inside the objective seed.
inline constexpr std::uint64_t kStreamStructure = 101;
inline constexpr std::uint64_t kStreamTeacher = 102;
inline constexpr std::uint64_t kStreamInit = 103;

inline std::vector<double> teacher_weights(const ObjectiveSpec& spec) {
  RngStream rng(spec.seed, kStreamTeacher);
  const std::size_t n = spec.kind == ObjectiveKind::kMlp ? spec.classes * spec.inputs : spec.dim;
  std::vector<double> w(n);
  for (double& x : w) x = rng.normal();
  return w;
}

}  // namespace detail

/// Quadratic with log-spaced eigenvalues in [1, condition].
inline Quadratic make_quadratic(std::size_t dim, double condition, double noise_sigma, std::uint64_t seed,
                                bool rotate = true) {
  RngStream rng(seed, detail::kStreamStructure);
  std::vector<double> eig(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    const double f = dim == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(dim - 1);
    eig[i] = std::pow(condition, f);
  }
  Quadratic q;
  q.a.assign(dim * dim, 0.0);
  if (rotate) {
    const auto basis = detail::random_orthogonal(dim, rng);
    for (std::size_t r = 0; r < dim; ++r) {
      for (std::size_t c = 0; c < dim; ++c) {
        double s = 0.0;
        for (std::size_t k = 0; k < dim; ++k) s += basis[r * dim + k] * eig[k] * basis[c * dim + k];
        q.a[r * dim + c] = s;
      }
    }
    // Symmetrize away rounding.
    for (std::size_t r = 0; r < dim; ++r) {
      for (std::size_t c = r + 1; c < dim; ++c) {
        const double m = 0.5 * (q.a[r * dim + c] + q.a[c * dim + r]);
        q.a[r * dim + c] = q.a[c * dim + r] = m;
      }
    }
  } else {
    for (std::size_t i = 0; i < dim; ++i) q.a[i * dim + i] = eig[i];
  }
  q.theta_star = ParamVector(dim);
  for (double& x : q.theta_star) x = rng.normal();
  q.noise_sigma = noise_sigma;
  return q;
}

inline Objective make_objective(const ObjectiveSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case ObjectiveKind::kQuadratic:
      return make_quadratic(spec.dim, spec.condition, spec.noise_sigma, spec.seed, spec.rotate);
    case ObjectiveKind::kLinReg: return LinReg{spec.dim};
    case ObjectiveKind::kMlp: return Mlp{spec.inputs, spec.hidden, spec.classes};
  }
  throw InvalidArgument("unknown objective kind");
}

/// Starting point: zeros for convex objectives, scaled Gaussian weights with
/// zero biases for the MLP.
inline ParamVector initial_theta(const ObjectiveSpec& spec) {
  const Objective obj = make_objective(spec);
  ParamVector theta(param_dim(obj));
  if (const auto* m = std::get_if<Mlp>(&obj)) {
    RngStream rng(spec.seed, detail::kStreamInit);
    const std::size_t b1 = m->hidden * m->inputs;
    const std::size_t w2 = b1 + m->hidden;
    const std::size_t b2 = w2 + m->classes * m->hidden;
    for (std::size_t i = 0; i < b1; ++i) theta[i] = rng.normal() / std::sqrt(static_cast<double>(m->inputs));
    for (std::size_t i = w2; i < b2; ++i) theta[i] = rng.normal() / std::sqrt(static_cast<double>(m->hidden));
  }
  return theta;
}

/// Draws `n` samples. Costs are uniform on [cost_min, cost_max]. Linreg
/// targets come from a fixed teacher vector plus label noise; MLP classes
/// are argmax of a fixed linear teacher. Quadratic samples carry no features.
inline std::vector<Sample> generate_samples(const ObjectiveSpec& spec, std::size_t n, std::int64_t cost_min,
                                            std::int64_t cost_max, RngStream& rng) {
  spec.validate();
  const auto teacher = detail::teacher_weights(spec);
  std::vector<Sample> out(n);
  for (auto& s : out) {
    s.cost = rng.uniform_int(cost_min, cost_max);
    switch (spec.kind) {
      case ObjectiveKind::kQuadratic: break;
      case ObjectiveKind::kLinReg: {
        s.features.resize(spec.dim);
        double y = 0.0;
        for (std::size_t i = 0; i < spec.dim; ++i) {
          s.features[i] = rng.normal();
          y += teacher[i] * s.features[i];
        }
        s.target = y + spec.label_noise * rng.normal();
        break;
      }
      case ObjectiveKind::kMlp: {
        s.features.resize(spec.inputs);
        for (double& x : s.features) x = rng.normal();
        std::size_t best = 0;
        double best_score = -INFINITY;
        for (std::size_t k = 0; k < spec.classes; ++k) {
          double z = 0.0;
          for (std::size_t i = 0; i < spec.inputs; ++i) z += teacher[k * spec.inputs + i] * s.features[i];
          if (z > best_score) {
            best_score = z;
            best = k;
          }
        }
        s.target = static_cast<double>(best);
        break;
      }
    }
  }
  return out;
}

}  // namespace asgd::models
