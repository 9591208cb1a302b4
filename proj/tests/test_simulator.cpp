// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "asgd/harness/selftest.hpp"
#include "asgd/simulator/simulate.hpp"

namespace asgd::sim {
namespace {

using harness::canonical_staleness_config;

ExperimentConfig small_config(Strategy s, std::uint64_t workers = 4) {
  ExperimentConfig cfg;
  cfg.objective.dim = 6;
  cfg.objective.noise_sigma = 0.5;
  cfg.data.samples = 300;
  cfg.data.cost_min = 1;
  cfg.data.cost_max = 20;
  cfg.data.probe_samples = 4;
  cfg.batch_budget = 40;
  cfg.workers = workers;
  cfg.strategy = s;
  cfg.compute = NormalTime{1.0, 0.3};
  cfg.lr.base_lr = 0.01;
  cfg.max_updates = 200;
  cfg.seed = 9;
  return cfg;
}

TEST(Staleness, AsyncIsExactlyNMinusOneAfterWarmup) {
  const auto trace = run_simulation(canonical_staleness_config(Async{}));
  const auto sum = staleness_summary(trace);
  EXPECT_EQ(sum.histogram, (std::map<std::uint64_t, std::uint64_t>{{3, sum.count}}));
  // Cold start: worker i pushes against version 0 after i earlier updates.
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(trace.rows[i].staleness, i);
}

TEST(Staleness, SyncIsZero) {
  const auto trace = run_simulation(canonical_staleness_config(Sync{}));
  for (const auto& r : trace.rows) EXPECT_EQ(r.staleness, 0u);
  EXPECT_EQ(staleness_summary(trace).mean, 0.0);
}

TEST(Staleness, TableValues) {
  EXPECT_EQ(staleness_summary(run_simulation(canonical_staleness_config(GlobalAccum{4}))).mean, 0.75);
  EXPECT_EQ(staleness_summary(run_simulation(canonical_staleness_config(Combined{2, 2}))).mean, 1.5);
  EXPECT_EQ(staleness_summary(run_simulation(canonical_staleness_config(LocalAccum{4}))).mean, 3.0);
}

class SyncStalePeriod : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(SyncStalePeriod, MeanIsHalfOfPeriodMinusOne) {
  const std::uint64_t u = GetParam();
  const auto trace = run_simulation(canonical_staleness_config(SyncStale{u}));
  EXPECT_EQ(staleness_summary(trace).mean, static_cast<double>(u - 1) / 2.0);
}

TEST_P(SyncStalePeriod, PullVersionFollowsRoundModPeriod) {
  const std::uint64_t u = GetParam();
  const auto trace = run_simulation(canonical_staleness_config(SyncStale{u}, 20));
  // Round r pushes against version r; pull_version = r - staleness.
  for (std::size_t i = 0; i < trace.rows.size(); ++i) {
    const std::uint64_t r = i / 4;
    ASSERT_EQ(r - trace.rows[i].staleness, r - r % u) << "push " << i;
  }
}

INSTANTIATE_TEST_SUITE_P(Periods, SyncStalePeriod, ::testing::Values(2, 3, 5, 7));

TEST(Equivalence, DegenerateAccumulationMatchesAsync) {
  const auto base = run_simulation(small_config(Async{}));
  ASSERT_GT(base.rows.size(), 100u);
  for (Strategy s : {Strategy{LocalAccum{1}}, Strategy{GlobalAccum{1}}, Strategy{Combined{1, 1}}}) {
    const auto other = run_simulation(small_config(s));
    EXPECT_TRUE(same_trajectory(base, other)) << label(s);
    EXPECT_NE(base.rows.front().strategy, other.rows.front().strategy);
  }
}

TEST(Equivalence, SyncStaleOneMatchesSync) {
  EXPECT_TRUE(same_trajectory(run_simulation(small_config(Sync{})), run_simulation(small_config(SyncStale{1}))));
}

TEST(Equivalence, SyncIsGlobalAccumOverAllWorkers) {
  EXPECT_EQ(global_steps(Sync{}, 6), 6u);
  const auto trace = run_simulation(small_config(Sync{}, 6));
  EXPECT_EQ(trace.pushes, 6 * trace.updates);
}

// Serial oracle written directly against the optimizer and objective.
TEST(Equivalence, SingleWorkerIsSerialAdam) {
  for (Strategy s : {Strategy{Async{}}, Strategy{Sync{}}, Strategy{LocalAccum{1}}, Strategy{GlobalAccum{1}}}) {
    auto cfg = small_config(s, 1);
    const auto trace = run_simulation(cfg);
    const Problem p = build_problem(cfg);
    RngStream noise(cfg.seed, noise_stream(0));
    optim::AdamConfig adam = cfg.adam;
    optim::AdamState st(p.initial.dim());
    ParamVector theta = p.initial;
    for (std::uint64_t t = 1; t <= cfg.max_updates; ++t) {
      const auto& batch = p.batches[(t - 1) % p.batches.size()];
      const ParamVector g = models::grad(p.objective, theta, batch, noise);
      auto [ns, nt] = optim::adam_step(st, adam, theta, g, lr_at(cfg.lr, t));
      st = std::move(ns);
      theta = std::move(nt);
      ASSERT_EQ(trace.rows[t - 1].staleness, 0u);
      ASSERT_EQ(trace.rows[t - 1].loss_probe, models::loss(p.objective, theta, p.probe));
    }
    EXPECT_EQ(trace.final_theta, theta) << label(s);
  }
}

TEST(SyncRound, EqualsSerialStepOnMeanGradient) {
  auto cfg = small_config(Sync{}, 5);
  cfg.max_updates = 1;
  const auto trace = run_simulation(cfg);
  const Problem p = build_problem(cfg);
  ParamVector mean(p.initial.dim());
  for (std::uint64_t i = 0; i < cfg.workers; ++i) {
    RngStream noise(cfg.seed, noise_stream(i));
    mean += models::grad(p.objective, p.initial, p.batches[i], noise);
  }
  mean *= 1.0 / static_cast<double>(cfg.workers);
  auto [st, theta] = optim::adam_step(optim::AdamState(p.initial.dim()), cfg.adam, p.initial, mean, cfg.lr.base_lr);
  EXPECT_LT(relative_error(trace.final_theta - p.initial, theta - p.initial), 1e-12);
}

TEST(Accounting, StalenessBoundedByVersion) {
  for (Strategy s : {Strategy{Async{}}, Strategy{Sync{}}, Strategy{SyncStale{3}}, Strategy{LocalAccum{3}},
                     Strategy{GlobalAccum{3}}, Strategy{Combined{2, 3}}}) {
    const auto trace = run_simulation(small_config(s, 5));
    std::uint64_t prev_version = 0;
    for (const auto& r : trace.rows) {
      // Version at push is update_idx, or one less when the push triggered an update.
      const std::uint64_t at_push = r.update_idx > prev_version ? prev_version : r.update_idx;
      ASSERT_LE(r.staleness, at_push) << label(s);
      prev_version = r.update_idx;
    }
  }
}

TEST(Accounting, GlobalAccumUpdatesAreFloorOfPushesOverG) {
  for (std::uint64_t g : {2u, 3u, 4u, 7u}) {
    auto cfg = small_config(GlobalAccum{g});
    cfg.max_updates = 1'000'000;
    cfg.max_pushes = 101;
    const auto trace = run_simulation(cfg);
    EXPECT_EQ(trace.pushes, 101u);
    EXPECT_EQ(trace.updates, 101u / g);
  }
}

TEST(Accounting, LocalAccumSendsFewerMessagesForTheSameCompute) {
  auto a = small_config(Async{});
  a.compute = ConstantTime{1.0};
  a.max_updates = 1'000'000;
  a.max_time = 100.0;
  auto l = a;
  l.strategy = LocalAccum{4};
  const auto ta = run_simulation(a);
  const auto tl = run_simulation(l);
  // Without latency the compute schedule does not depend on the strategy.
  EXPECT_EQ(ta.computes, tl.computes);
  EXPECT_EQ(ta.cost_processed, tl.cost_processed);
  EXPECT_LE(4 * tl.pushes, ta.pushes);
  EXPECT_GE(4 * tl.pushes + 4 * 3, ta.pushes);
  EXPECT_EQ(ta.comm_time_s, 0.0);

  a.latency = l.latency = 0.05;
  const auto la = run_simulation(a);
  const auto ll = run_simulation(l);
  EXPECT_GT(la.comm_time_s, 0.0);
  EXPECT_LT(ll.comm_time_s, la.comm_time_s);
  EXPECT_GT(ll.computes, la.computes);
}

TEST(LocalAccum, OneMessagePerLComputesCarryingFirstPullVersion) {
  auto cfg = small_config(LocalAccum{4});
  const Problem p = build_problem(cfg);
  ServerState server(p.initial, 1, cfg.optimizer);
  server.version = 17;
  WorkerState w(0, cfg.seed, p.initial.dim());
  w.pull(server);
  server.version = 30;  // the server moves on; the worker keeps its snapshot
  DataCursor cursor(p.batches.size());
  RngStream oracle_noise(cfg.seed, noise_stream(0));
  ParamVector sum(p.initial.dim());
  for (int k = 0; k < 4; ++k) {
    begin_compute(w, p.batches, cursor, cfg.compute, cfg.batch_budget);
    sum += models::grad(p.objective, p.initial, p.batches[static_cast<std::size_t>(k)], oracle_noise);
    const auto msg = worker_cycle(w, p.objective, p.batches, 4, CombineMode::kMean, k);
    if (k < 3) {
      EXPECT_FALSE(msg.has_value());
      continue;
    }
    ASSERT_TRUE(msg.has_value());
    EXPECT_EQ(msg->pull_version, 17u);
    EXPECT_LT(relative_error(msg->grad, 0.25 * sum), 1e-14);
    EXPECT_EQ(w.local_count, 0u);
  }
  const auto trace = run_simulation(cfg);
  // Workers may hold partial buffers when the budget runs out.
  EXPECT_GE(trace.computes, 4 * trace.pushes);
  EXPECT_LE(trace.computes, 4 * trace.pushes + cfg.workers * 3);
}

TEST(Server, AccumulatesThenApplies) {
  const ParamVector theta{1.0, -1.0};
  ServerState s(theta, 3, OptimizerKind::kSgd);
  UpdateRule rule;
  rule.optimizer = OptimizerKind::kSgd;
  rule.lr.base_lr = 0.5;
  GradientMsg m;
  for (double g : {1.0, 2.0}) {
    m.grad = ParamVector{g, g};
    const auto out = server_on_push(s, m, rule);
    EXPECT_FALSE(out.updated);
    EXPECT_EQ(s.theta, theta);
  }
  EXPECT_EQ(s.accum_buffer, (ParamVector{3.0, 3.0}));
  m.grad = ParamVector{3.0, 3.0};
  EXPECT_TRUE(server_on_push(s, m, rule).updated);
  EXPECT_EQ(s.theta, (ParamVector{0.0, -2.0}));
  EXPECT_EQ(s.version, 1u);
  EXPECT_EQ(s.accum_count, 0u);

  rule.combine = CombineMode::kSum;
  for (int i = 0; i < 3; ++i) server_on_push(s, m, rule);
  EXPECT_EQ(s.theta, (ParamVector{-4.5, -6.5}));
}

TEST(Server, RejectsBadMessagesWithoutSideEffects) {
  ServerState s(ParamVector{0.0}, 1, OptimizerKind::kAdam);
  UpdateRule rule;
  GradientMsg m;
  m.grad = ParamVector{NAN};
  EXPECT_THROW(server_on_push(s, m, rule), NonFinite);
  m.grad = ParamVector{1.0};
  m.pull_version = 3;
  EXPECT_THROW(server_on_push(s, m, rule), InvalidArgument);
  EXPECT_EQ(s.version, 0u);
  EXPECT_EQ(s.total_pushes, 0u);
}

TEST(Divergence, SgdAtLargeRatePreservesLastFiniteRow) {
  auto cfg = small_config(Async{});
  cfg.optimizer = OptimizerKind::kSgd;
  cfg.objective.condition = 10;
  cfg.lr.base_lr = 5.0;
  cfg.max_updates = 100000;
  const auto trace = run_simulation(cfg);
  ASSERT_EQ(trace.status, RunStatus::kDiverged);
  EXPECT_FALSE(trace.diagnostic.empty());
  ASSERT_FALSE(trace.rows.empty());
  for (const auto& r : trace.rows) ASSERT_TRUE(std::isfinite(r.loss_probe));
  EXPECT_TRUE(trace.final_theta.is_finite());
  EXPECT_LT(trace.updates, cfg.max_updates);
}

TEST(Determinism, SameSeedSameTrace) {
  for (Strategy s : {Strategy{Async{}}, Strategy{SyncStale{4}}, Strategy{Combined{2, 2}}}) {
    const auto a = run_simulation(small_config(s));
    const auto b = run_simulation(small_config(s));
    EXPECT_TRUE(same_trajectory(a, b));
    auto other = small_config(s);
    other.seed = 10;
    EXPECT_FALSE(same_trajectory(a, run_simulation(other)));
  }
}

TEST(Budgets, TimeBudgetStopsTheClock) {
  auto cfg = small_config(Async{});
  cfg.max_updates = 1'000'000;
  cfg.max_time = 25.0;
  const auto trace = run_simulation(cfg);
  EXPECT_LE(trace.end_time_s, 25.0);
  EXPECT_GT(trace.updates, 10u);
}

TEST(StalenessSummary, WarmupAndErrors) {
  std::vector<TraceRow> rows(5);
  for (std::size_t i = 0; i < 5; ++i) rows[i].staleness = i;
  const auto s = staleness_summary(rows, 2);
  EXPECT_EQ(s.mean, 3.0);
  EXPECT_EQ(s.count, 3u);
  EXPECT_THROW(staleness_summary(rows, 5), InvalidArgument);
}

TEST(Strategy, ValidationMessages) {
  try {
    validate(GlobalAccum{0});
    FAIL() << "expected an error";
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("G >= 1"), std::string::npos);
  }
  EXPECT_THROW(validate(LocalAccum{0}), InvalidArgument);
  EXPECT_THROW(validate(SyncStale{0}), InvalidArgument);
  EXPECT_EQ(label(Combined{2, 2}), "combined:2:2");
}

}  // namespace
}  // namespace asgd::sim
