// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "asgd/core/compute_time.hpp"
#include "asgd/core/error.hpp"
#include "asgd/core/schedule.hpp"
#include "asgd/models/factory.hpp"
#include "asgd/optim/adam.hpp"
#include "asgd/simulator/strategy.hpp"

namespace asgd {

enum class CombineMode { kMean, kSum };
enum class OptimizerKind { kAdam, kSgd };

/// Complete description of one run. Defaults are the documented defaults of
/// the config file format.
struct ExperimentConfig {
  models::ObjectiveSpec objective;
  models::DataSpec data;
  std::int64_t batch_budget = 500;

  std::uint64_t workers = 4;
  sim::Strategy strategy = sim::Async{};
  CombineMode combine = CombineMode::kMean;

  OptimizerKind optimizer = OptimizerKind::kAdam;
  optim::AdamConfig adam;  // alpha is superseded by lr
  LrSchedule lr;

  ComputeTimeModel compute = ConstantTime{1.0};
  double latency = 0.0;  // simulated seconds per pushed message
  bool stagger = true;   // worker i starts at i/N of the mean compute time

  std::uint64_t max_updates = 1000;
  std::uint64_t max_pushes = 0;  // 0 = unlimited
  double max_time = 0.0;         // 0 = unlimited

  std::uint64_t seed = 42;
  std::int64_t staleness_warmup = -1;  // pushes excluded from statistics; -1 = N
  std::uint64_t probe_every = 1;       // probe loss refresh period, in updates

  std::vector<double> thresholds = {0.5, 0.1, 0.01};
  std::optional<double> reference_loss;

  bool parallel = false;
  double parallel_time_scale = 1e-3;  // wall seconds slept per simulated second

  std::string out_dir;
  std::string name = "run";

  std::uint64_t warmup_pushes() const {
    return staleness_warmup < 0 ? workers : static_cast<std::uint64_t>(staleness_warmup);
  }

  void validate() const {
    objective.validate();
    data.validate();
    if (batch_budget < 1) throw InvalidArgument("data.budget must be >= 1");
    if (data.cost_max > batch_budget) throw InvalidArgument("data.cost_max must not exceed data.budget");
    if (workers < 1) throw InvalidArgument("workers must be >= 1");
    sim::validate(strategy);
    adam.validate();
    lr.validate();
    asgd::validate(compute);
    if (!(latency >= 0.0)) throw InvalidArgument("comm.latency must be >= 0");
    if (max_updates < 1) throw InvalidArgument("budget.updates must be >= 1");
    if (!(max_time >= 0.0)) throw InvalidArgument("budget.time must be >= 0");
    if (probe_every < 1) throw InvalidArgument("probe_every must be >= 1");
    for (double f : thresholds) {
      if (!(f > 0.0 && f < 1.0)) throw InvalidArgument("report.thresholds entries must be in (0, 1)");
    }
    if (!(parallel_time_scale >= 0.0)) throw InvalidArgument("parallel.time_scale must be >= 0");
  }

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

}  // namespace asgd
