// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "asgd/core/rng.hpp"
#include "asgd/harness/selftest.hpp"
#include "asgd/optim/adam.hpp"
#include "asgd/optim/efficiency.hpp"
#include "asgd/optim/sgd.hpp"

namespace asgd::optim {
namespace {

const AdamConfig kTableCfg{0.001, 0.9, 0.98, 1e-8};

std::vector<double> run_scalar(const std::vector<double>& gs, const AdamConfig& cfg) {
  AdamState s(1);
  ParamVector theta(1);
  std::vector<double> traj;
  for (double g : gs) {
    auto [ns, nt] = adam_step(s, cfg, theta, ParamVector{g});
    s = std::move(ns);
    theta = std::move(nt);
    traj.push_back(theta[0]);
  }
  return traj;
}

TEST(AdamStep, ConstantStreamFirstStepMoments) {
  AdamState s(1);
  auto [s1, th] = adam_step(s, kTableCfg, ParamVector{0.0}, ParamVector{1.0});
  EXPECT_NEAR(s1.m[0], 0.1, 1e-15);
  EXPECT_NEAR(s1.v[0], 0.02, 1e-15);
  const auto c = corrected_moments(s1, kTableCfg);
  EXPECT_NEAR(c.m_hat[0], 1.0, 1e-14);
  EXPECT_NEAR(c.v_hat[0], 1.0, 1e-14);
  EXPECT_EQ(s1.t, 1u);
}

TEST(AdamStep, ConstantStreamSixSteps) {
  const auto traj = run_scalar({1, 1, 1, 1, 1, 1}, kTableCfg);
  EXPECT_NEAR(traj[5], -0.006, 5e-4);
  for (int t = 0; t < 6; ++t) EXPECT_EQ(harness::round3(traj[t]), -0.001 * (t + 1));
}

TEST(AdamStep, ScaledStream) {
  AdamState s(1);
  ParamVector theta(1);
  const double gs[] = {0.5, 1.5, 0.5, 1.5, 0.5, 1.5};
  for (int t = 0; t < 6; ++t) {
    auto [ns, nt] = adam_step(s, kTableCfg, theta, ParamVector{gs[t]});
    s = std::move(ns);
    theta = std::move(nt);
    if (t == 1) {
      const auto c = corrected_moments(s, kTableCfg);
      EXPECT_NEAR(c.m_hat[0], 1.026, 5e-4);
      EXPECT_NEAR(c.v_hat[0], 1.26, 5e-4);
    }
  }
  EXPECT_EQ(harness::round3(theta[0]), -0.005);
}

TEST(AdamStep, DifferentSignStreamTurnsNegativeAtSixthStep) {
  const auto traj = run_scalar({-1, 2, -1, 2, -1, 2}, kTableCfg);
  for (int t = 0; t < 5; ++t) EXPECT_GE(traj[t], 0.0) << "t=" << t + 1;
  EXPECT_LT(traj[5], 0.0);
  EXPECT_LT(std::abs(traj[5]), 0.0005);
}

TEST(AdamStep, BiasCorrectionExactAtFirstStep) {
  RngStream r(11);
  for (int i = 0; i < 100; ++i) {
    const double g = r.normal(0.0, 5.0);
    AdamConfig cfg{0.01, r.uniform() * 0.99, r.uniform() * 0.999, 0.0};
    auto [s1, th] = adam_step(AdamState(1), cfg, ParamVector{0.0}, ParamVector{g});
    const auto c = corrected_moments(s1, cfg);
    EXPECT_DOUBLE_EQ(c.m_hat[0], g);
    EXPECT_DOUBLE_EQ(c.v_hat[0], g * g);
  }
}

TEST(AdamStep, LrOverrideReplacesAlpha) {
  auto [a, ta] = adam_step(AdamState(1), kTableCfg, ParamVector{0.0}, ParamVector{1.0}, 0.5);
  EXPECT_NEAR(ta[0], -0.5, 1e-7);
}

TEST(AdamStep, Errors) {
  EXPECT_THROW(adam_step(AdamState(2), kTableCfg, ParamVector(2), ParamVector{1.0, NAN}), NonFinite);
  EXPECT_THROW(adam_step(AdamState(2), kTableCfg, ParamVector(2), ParamVector(3)), DimensionMismatch);
  EXPECT_THROW(adam_step(AdamState(3), kTableCfg, ParamVector(2), ParamVector(2)), DimensionMismatch);
}

TEST(AdamStep, SecondMomentNeverNegative) {
  RngStream r(5);
  AdamState s(8);
  ParamVector theta(8);
  for (int t = 0; t < 2000; ++t) {
    ParamVector g(8);
    for (double& x : g) x = r.normal(0.0, std::pow(10.0, r.uniform() * 8 - 4));
    if (t % 7 == 0) g.fill(0.0);
    auto [ns, nt] = adam_step(s, kTableCfg, theta, g);
    s = std::move(ns);
    theta = std::move(nt);
    for (double v : s.v) ASSERT_GE(v, 0.0);
    const auto c = corrected_moments(s, kTableCfg);
    for (double v : c.v_hat) ASSERT_FALSE(std::isnan(std::sqrt(v)));
  }
}

TEST(AdamDirection, ConstantStreamIsOne) {
  AdamConfig cfg = kTableCfg;
  cfg.epsilon = 0.0;
  AdamState s(1);
  ParamVector theta(1);
  for (int t = 0; t < 50; ++t) {
    auto [ns, nt] = adam_step(s, cfg, theta, ParamVector{1.0});
    s = std::move(ns);
    theta = std::move(nt);
    EXPECT_NEAR(adam_direction(s, cfg)[0], 1.0, 1e-12);
  }
}

TEST(AdamDirection, FirstStepIsSign) {
  AdamConfig cfg = kTableCfg;
  cfg.epsilon = 0.0;
  const ParamVector g{-3.0, 0.25, 7.0, -1e-6};
  auto [s1, th] = adam_step(AdamState(4), cfg, ParamVector(4), g);
  const auto d = adam_direction(s1, cfg);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(d[i], g[i] > 0 ? 1.0 : -1.0);
}

TEST(AdamDirection, DifferentSignSecondStep) {
  // Direct recurrence: m2 = 0.9(-0.1) + 0.2 = 0.11, m_hat = 0.11 / 0.19;
  // v2 = 0.98(0.02) + 0.08 = 0.0996, v_hat = 0.0996 / 0.0396.
  const double expected = (0.11 / 0.19) / std::sqrt(0.0996 / (1 - 0.98 * 0.98));
  AdamConfig cfg = kTableCfg;
  cfg.epsilon = 0.0;
  AdamState s(1);
  ParamVector theta(1);
  for (double g : {-1.0, 2.0}) {
    auto [ns, nt] = adam_step(s, cfg, theta, ParamVector{g});
    s = std::move(ns);
    theta = std::move(nt);
  }
  EXPECT_NEAR(adam_direction(s, cfg)[0], expected, 1e-12);
  EXPECT_NEAR(expected, 0.365, 5e-4);
}

TEST(AdamDirection, RequiresAStep) { EXPECT_THROW(adam_direction(AdamState(1), kTableCfg), InvalidArgument); }

// Scaling every gradient by c > 0 leaves the trajectory unchanged when eps = 0.
TEST(AdamProperty, ScaleInvariance) {
  AdamConfig cfg = kTableCfg;
  cfg.epsilon = 0.0;
  RngStream r(77);
  std::vector<ParamVector> stream;
  for (int t = 0; t < 1000; ++t) {
    ParamVector g(5);
    for (double& x : g) x = r.normal(0.3, 1.0);
    stream.push_back(g);
  }
  auto trajectory = [&](double c) {
    AdamState s(5);
    ParamVector theta(5, 0.5);
    std::vector<ParamVector> out;
    for (const auto& g : stream) {
      auto [ns, nt] = adam_step(s, cfg, theta, c * g);
      s = std::move(ns);
      theta = std::move(nt);
      out.push_back(theta);
    }
    return out;
  };
  const auto base = trajectory(1.0);
  for (double c : {0.1, 10.0, 1e-3, 1e3}) {
    const auto scaled = trajectory(c);
    for (std::size_t t = 0; t < base.size(); ++t) ASSERT_LT(relative_error(base[t], scaled[t]), 1e-9) << c;
  }
}

TEST(Sgd, Definition) {
  EXPECT_EQ(sgd_step(ParamVector{1.0}, ParamVector{1.0}, 0.5), (ParamVector{0.5}));
  EXPECT_EQ(sgd_step(ParamVector{0, 0}, ParamVector{1, -1}, 1.0), (ParamVector{-1, 1}));
  const ParamVector v{3, -2, 1};
  EXPECT_EQ(sgd_step(v, ParamVector(3), 0.1), v);
}

TEST(Sgd, Errors) {
  EXPECT_THROW(sgd_step(ParamVector{1.0}, ParamVector{INFINITY}, 0.1), NonFinite);
  EXPECT_THROW(sgd_step(ParamVector{NAN}, ParamVector{1.0}, 0.1), NonFinite);
  EXPECT_THROW(sgd_step(ParamVector{1.0}, ParamVector{1.0}, 0.0), InvalidArgument);
  EXPECT_THROW(sgd_step(ParamVector{1.0}, ParamVector{1.0, 2.0}, 0.1), DimensionMismatch);
}

TEST(PredictedEfficiency, NoiselessIsOne) {
  for (double mean : {-3.0, 0.1, 1.0, 42.0}) EXPECT_DOUBLE_EQ(predicted_efficiency({mean, 0.0, 1}), 1.0);
}

TEST(PredictedEfficiency, ZeroMeanIsAnError) { EXPECT_THROW(predicted_efficiency({0.0, 1.0, 1}), InvalidArgument); }

TEST(PredictedEfficiency, AlternatingMinusOneTwoStream) {
  // Alternating -1, 2: mean 0.5, variance 2.25 -> 1/sqrt(10).
  const double predicted = predicted_efficiency({0.5, 2.25, 1});
  EXPECT_NEAR(predicted, 1.0 / std::sqrt(10.0), 1e-15);
  std::uint64_t k = 0;
  const double empirical = empirical_efficiency([&] { return (k++ % 2 == 0) ? -1.0 : 2.0; }, 100000, kTableCfg);
  EXPECT_NEAR(empirical, predicted, 0.1 * predicted);
}

TEST(PredictedEfficiency, SumOfFourSamples) {
  const double predicted = predicted_efficiency({1.0, 1.0, 4});
  EXPECT_NEAR(predicted, 1.0 / std::sqrt(1.25), 1e-15);
  RngStream r(314);
  const double empirical = empirical_efficiency([&] { return r.normal(1.0, 1.0); }, 100000, kTableCfg, 4);
  EXPECT_NEAR(empirical, predicted, 0.05 * predicted);
}

class EfficiencyByCov : public ::testing::TestWithParam<double> {};

TEST_P(EfficiencyByCov, MatchesPredictionWithinFivePercent) {
  const double cov = GetParam();
  RngStream r(1000 + static_cast<std::uint64_t>(cov * 10));
  const double predicted = predicted_efficiency({1.0, cov * cov, 1});
  const double empirical = empirical_efficiency([&] { return r.normal(1.0, cov); }, 100000, kTableCfg);
  EXPECT_NEAR(empirical, predicted, 0.05 * predicted) << "cov=" << cov;
}

INSTANTIATE_TEST_SUITE_P(Covs, EfficiencyByCov, ::testing::Values(0.25, 0.5, 1.0, 1.5, 2.0, 3.0));

TEST(EfficiencyProperty, SummingIsMonotoneInK) {
  for (double cov : {0.5, 1.0, 2.0}) {
    double prev = 0.0;
    for (std::uint64_t k : {1u, 2u, 4u, 8u}) {
      RngStream r(99);
      const double e = empirical_efficiency([&] { return r.normal(1.0, cov); }, 50000, kTableCfg, k);
      EXPECT_GE(e, prev) << "cov=" << cov << " k=" << k;
      prev = e;
    }
  }
}

}  // namespace
}  // namespace asgd::optim
