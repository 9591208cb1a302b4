// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "asgd/models/factory.hpp"
#include "asgd/models/objective.hpp"
#include "asgd/optim/adam.hpp"
#include "asgd/simulator/simulate.hpp"

namespace asgd::harness {

struct SelfTestCheck {
  std::string name;
  double expected = 0.0;
  double actual = 0.0;
  bool ok = false;
};

struct SelfTestReport {
  std::string title;
  std::vector<SelfTestCheck> checks;

  bool passed() const {
    for (const auto& c : checks) {
      if (!c.ok) return false;
    }
    return !checks.empty();
  }
  std::size_t failures() const {
    std::size_t n = 0;
    for (const auto& c : checks) n += c.ok ? 0 : 1;
    return n;
  }
};

inline void print_report(std::ostream& os, const SelfTestReport& r, bool verbose = false) {
  for (const auto& c : r.checks) {
    if (verbose || !c.ok) {
      os << (c.ok ? "  ok    " : "  FAIL  ") << c.name << ": expected " << c.expected << ", got " << c.actual
         << '\n';
    }
  }
  os << r.title << ": " << (r.checks.size() - r.failures()) << "/" << r.checks.size() << " checks passed"
     << (r.passed() ? "" : " -- FAILED") << '\n';
}

/// Round half away from zero to three decimals. The relative nudge keeps
/// decimal ties such as 0.2255 (stored as 0.22549999...) on the intended side.
inline double round3(double x) { return std::round(x * 1000.0 * (1.0 + 1e-12)) / 1000.0; }

/// One gradient stream of the six-step Adam reference example.
struct AdamTableStream {
  const char* name;
  std::array<double, 6> g;
  std::array<double, 6> m, v, m_hat, v_hat, theta;
};

/// Reference values, alpha = 0.001, beta1 = 0.9, beta2 = 0.98.
inline const std::array<AdamTableStream, 3>& adam_reference_table() {
  static const std::array<AdamTableStream, 3> table{{
      {"constant",
       {1, 1, 1, 1, 1, 1},
       {0.1, 0.19, 0.271, 0.344, 0.41, 0.469},
       {0.02, 0.04, 0.059, 0.078, 0.096, 0.114},
       {1, 1, 1, 1, 1, 1},
       {1, 1, 1, 1, 1, 1},
       {-0.001, -0.002, -0.003, -0.004, -0.005, -0.006}},
      {"scaled",
       {0.5, 1.5, 0.5, 1.5, 0.5, 1.5},
       {0.05, 0.195, 0.226, 0.353, 0.368, 0.481},
       {0.005, 0.05, 0.054, 0.098, 0.101, 0.144},
       {0.5, 1.026, 0.832, 1.026, 0.898, 1.026},
       {0.25, 1.26, 0.917, 1.26, 1.05, 1.26},
       {-0.001, -0.002, -0.003, -0.004, -0.005, -0.005}},
      {"different-sign",
       {-1, 2, -1, 2, -1, 2},
       {-0.1, 0.11, -0.001, 0.199, 0.079, 0.271},
       {0.02, 0.1, 0.118, 0.195, 0.211, 0.287},
       {-1, 0.579, -0.004, 0.579, 0.193, 0.579},
       {1, 2.515, 2, 2.515, 2.2, 2.515},
       {0.001, 0.001, 0.001, 0.0, 0.0, -0.0}},
  }};
  return table;
}

/// Replays the three gradient streams for six Adam steps and compares every
/// m, v, m_hat, v_hat and theta cell at three-decimal rounding. The
/// different-sign stream additionally must turn negative exactly at t = 6.
inline SelfTestReport selftest_adam_table() {
  SelfTestReport rep{"selftest adam", {}};
  optim::AdamConfig cfg{0.001, 0.9, 0.98, 1e-8};
  for (const auto& row : adam_reference_table()) {
    optim::AdamState state(1);
    ParamVector theta(1);
    for (std::size_t t = 0; t < 6; ++t) {
      auto [next, th] = optim::adam_step(state, cfg, theta, ParamVector{row.g[t]});
      state = std::move(next);
      theta = std::move(th);
      const auto mom = optim::corrected_moments(state, cfg);
      const std::string at = std::string(row.name) + " t=" + std::to_string(t + 1) + " ";
      auto cell = [&](const char* what, double expected, double actual) {
        rep.checks.push_back({at + what, expected, actual, round3(actual) == round3(expected)});
      };
      cell("m", row.m[t], state.m[0]);
      cell("v", row.v[t], state.v[0]);
      cell("m_hat", row.m_hat[t], mom.m_hat[0]);
      cell("v_hat", row.v_hat[t], mom.v_hat[0]);
      cell("theta", row.theta[t], theta[0]);
      if (std::string(row.name) == "different-sign") {
        const bool want_negative = t == 5;
        rep.checks.push_back({at + "theta sign (1 = negative)", want_negative ? 1.0 : 0.0, theta[0] < 0.0 ? 1.0 : 0.0,
                              (theta[0] < 0.0) == want_negative});
      }
    }
  }
  return rep;
}

/// N = 4, constant unit compute time, staggered starts, unit-cost samples.
/// Budgets cover a whole number of staleness cycles after the warmup pushes.
inline ExperimentConfig canonical_staleness_config(sim::Strategy strategy, std::uint64_t cycles = 250) {
  ExperimentConfig cfg;
  cfg.objective.dim = 4;
  cfg.objective.noise_sigma = 0.1;
  cfg.data.samples = 1000;
  cfg.data.cost_min = cfg.data.cost_max = 1;
  cfg.data.probe_samples = 1;
  cfg.batch_budget = 10;
  cfg.workers = 4;
  cfg.strategy = strategy;
  cfg.compute = ConstantTime{1.0};
  if (sim::is_barrier(strategy)) {
    cfg.max_updates = 1 + cycles * sim::pull_every(strategy);
  } else {
    cfg.max_updates = 1'000'000;
    cfg.max_pushes = cfg.workers + 4 * cycles * sim::global_steps(strategy, cfg.workers);
  }
  return cfg;
}

inline SelfTestReport selftest_staleness_table() {
  SelfTestReport rep{"selftest staleness", {}};
  struct Row {
    const char* name;
    sim::Strategy strategy;
    double expected;
  };
  const Row rows[] = {
      {"sync", sim::Sync{}, 0.0},
      {"async", sim::Async{}, 3.0},
      {"local_accum 4", sim::LocalAccum{4}, 3.0},
      {"combined 2/2", sim::Combined{2, 2}, 1.5},
      {"global_accum 4", sim::GlobalAccum{4}, 0.75},
      {"sync_stale U=5", sim::SyncStale{5}, 2.0},
      {"sync_stale U=7", sim::SyncStale{7}, 3.0},
  };
  for (const auto& r : rows) {
    const auto trace = sim::run_simulation(canonical_staleness_config(r.strategy));
    const double mean = sim::staleness_summary(trace).mean;
    rep.checks.push_back({std::string(r.name) + " mean staleness", r.expected, mean, mean == r.expected});
  }

  auto noisy = canonical_staleness_config(sim::Async{});
  noisy.compute = NormalTime{1.0, 0.2};
  noisy.max_pushes = 10'000;
  const double mean = sim::staleness_summary(sim::run_simulation(noisy)).mean;
  rep.checks.push_back({"async normal(1, 0.2) mean staleness in [2.8, 3.2]", 3.0, mean, mean >= 2.8 && mean <= 3.2});
  return rep;
}

/// Analytic gradients against central differences at h = 1e-4.
inline SelfTestReport selftest_gradients() {
  SelfTestReport rep{"selftest gradients", {}};
  auto check = [&](const char* name, const models::ObjectiveSpec& spec, double tol) {
    RngStream rng(spec.seed, 9);
    auto batch = models::make_batch(models::generate_samples(spec, 16, 1, 50, rng));
    const auto obj = models::make_objective(spec);
    ParamVector theta = models::initial_theta(spec);
    for (double& x : theta) x += 0.3 * rng.normal();
    const double err = relative_error(models::exact_grad(obj, theta, batch),
                                      models::finite_diff_grad(obj, theta, batch, 1e-4));
    rep.checks.push_back({std::string(name) + " relative error < " + std::to_string(tol), tol, err, err < tol});
  };
  models::ObjectiveSpec q;
  q.kind = models::ObjectiveKind::kQuadratic;
  check("quadratic", q, 1e-6);
  models::ObjectiveSpec l;
  l.kind = models::ObjectiveKind::kLinReg;
  l.dim = 10;
  check("linreg", l, 1e-6);
  models::ObjectiveSpec m;
  m.kind = models::ObjectiveKind::kMlp;
  check("mlp", m, 1e-4);
  return rep;
}

}  // namespace asgd::harness
