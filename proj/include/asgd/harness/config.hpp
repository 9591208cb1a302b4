// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <charconv>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "asgd/core/error.hpp"
#include "asgd/simulator/experiment_config.hpp"

namespace asgd::harness {

/// Raised for malformed or invalid configuration. `line` is 1-based, 0 when
/// the error is not tied to a line.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& msg, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + msg : msg), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Config documents are line oriented:
//
//   # comment
//   workers = 4
//   strategy = global_accum
//   strategy.global = 4
//
// A "[section]" line prefixes the keys after it with "section.".
// Unknown keys are rejected.

/// Ordered key -> value pairs.
using KeyValues = std::vector<std::pair<std::string, std::string>>;

struct ConfigEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string fmt_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <class T>
T parse_number(const std::string& key, const std::string& text, std::size_t line) {
  T value{};
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) throw ConfigError(key + ": cannot parse '" + text + "' as a number", line);
  return value;
}

inline bool parse_bool(const std::string& key, const std::string& text, std::size_t line) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'", line);
}

}  // namespace detail

/// Splits a document into entries. Syntax errors carry the line.
inline std::vector<ConfigEntry> tokenize_config(std::string_view text) {
  std::vector<ConfigEntry> out;
  std::string section;
  std::size_t lineno = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated section header", lineno);
      section = detail::trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", lineno);
    std::string key = detail::trim(std::string_view(line).substr(0, eq));
    std::string value = detail::trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key", lineno);
    if (!section.empty()) key = section + "." + key;
    out.push_back({std::move(key), std::move(value), lineno});
  }
  return out;
}

/// Builds a validated config from entries, applying documented defaults for
/// absent keys.
inline ExperimentConfig config_from_entries(const std::vector<ConfigEntry>& entries) {
  ExperimentConfig cfg;
  std::string strategy = "async";
  std::optional<std::uint64_t> pull_every, local, global;
  std::string compute = "constant";
  double compute_mean = 1.0, compute_stddev = 0.0;
  std::set<std::string> seen;
  std::map<std::string, std::size_t> key_line;

  for (const auto& [key, value, line] : entries) {
    if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'", line);
    key_line[key] = line;
    auto u64 = [&] { return detail::parse_number<std::uint64_t>(key, value, line); };
    auto i64 = [&] { return detail::parse_number<std::int64_t>(key, value, line); };
    auto dbl = [&] { return detail::parse_number<double>(key, value, line); };
    auto boolean = [&] { return detail::parse_bool(key, value, line); };

    if (key == "objective") {
      if (value == "quadratic") cfg.objective.kind = models::ObjectiveKind::kQuadratic;
      else if (value == "linreg") cfg.objective.kind = models::ObjectiveKind::kLinReg;
      else if (value == "mlp") cfg.objective.kind = models::ObjectiveKind::kMlp;
      else throw ConfigError("objective: expected quadratic, linreg or mlp", line);
    } else if (key == "objective.dim") cfg.objective.dim = u64();
    else if (key == "objective.condition") cfg.objective.condition = dbl();
    else if (key == "objective.rotate") cfg.objective.rotate = boolean();
    else if (key == "objective.noise_sigma") cfg.objective.noise_sigma = dbl();
    else if (key == "objective.label_noise") cfg.objective.label_noise = dbl();
    else if (key == "objective.inputs") cfg.objective.inputs = u64();
    else if (key == "objective.hidden") cfg.objective.hidden = u64();
    else if (key == "objective.classes") cfg.objective.classes = u64();
    else if (key == "objective.seed") cfg.objective.seed = u64();
    else if (key == "data.samples") cfg.data.samples = u64();
    else if (key == "data.cost_min") cfg.data.cost_min = i64();
    else if (key == "data.cost_max") cfg.data.cost_max = i64();
    else if (key == "data.budget") cfg.batch_budget = i64();
    else if (key == "data.probe_samples") cfg.data.probe_samples = u64();
    else if (key == "data.probe_seed") cfg.data.probe_seed = u64();
    else if (key == "workers") cfg.workers = u64();
    else if (key == "strategy") strategy = value;
    else if (key == "strategy.pull_every") pull_every = u64();
    else if (key == "strategy.local") local = u64();
    else if (key == "strategy.global") global = u64();
    else if (key == "combine") {
      if (value == "mean") cfg.combine = CombineMode::kMean;
      else if (value == "sum") cfg.combine = CombineMode::kSum;
      else throw ConfigError("combine: expected mean or sum", line);
    } else if (key == "optimizer") {
      if (value == "adam") cfg.optimizer = OptimizerKind::kAdam;
      else if (value == "sgd") cfg.optimizer = OptimizerKind::kSgd;
      else throw ConfigError("optimizer: expected adam or sgd", line);
    } else if (key == "adam.beta1") cfg.adam.beta1 = dbl();
    else if (key == "adam.beta2") cfg.adam.beta2 = dbl();
    else if (key == "adam.epsilon") cfg.adam.epsilon = dbl();
    else if (key == "lr.base") cfg.lr.base_lr = dbl();
    else if (key == "lr.warmup") cfg.lr.warmup_updates = u64();
    else if (key == "lr.decay") {
      if (value == "none") cfg.lr.decay = LrDecay::kNone;
      else if (value == "inverse_sqrt") cfg.lr.decay = LrDecay::kInverseSqrt;
      else throw ConfigError("lr.decay: expected none or inverse_sqrt", line);
    } else if (key == "lr.batch_scale") cfg.lr.batch_scale_factor = dbl();
    else if (key == "compute") compute = value;
    else if (key == "compute.mean") compute_mean = dbl();
    else if (key == "compute.stddev") compute_stddev = dbl();
    else if (key == "comm.latency") cfg.latency = dbl();
    else if (key == "stagger") cfg.stagger = boolean();
    else if (key == "budget.updates") cfg.max_updates = u64();
    else if (key == "budget.pushes") cfg.max_pushes = u64();
    else if (key == "budget.time") cfg.max_time = dbl();
    else if (key == "seed") cfg.seed = u64();
    else if (key == "staleness.warmup") cfg.staleness_warmup = i64();
    else if (key == "probe.every") cfg.probe_every = u64();
    else if (key == "report.thresholds") {
      cfg.thresholds.clear();
      std::istringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ',')) {
        item = detail::trim(item);
        if (!item.empty()) cfg.thresholds.push_back(detail::parse_number<double>(key, item, line));
      }
    } else if (key == "report.reference_loss") cfg.reference_loss = dbl();
    else if (key == "parallel") cfg.parallel = boolean();
    else if (key == "parallel.time_scale") cfg.parallel_time_scale = dbl();
    else if (key == "output.dir") cfg.out_dir = value;
    else if (key == "output.name") cfg.name = value;
    else throw ConfigError("unknown key '" + key + "'", line);
  }

  auto reject_param = [&](const char* key, const std::optional<std::uint64_t>& v) {
    if (v) throw ConfigError(std::string(key) + " does not apply to strategy " + strategy, key_line[key]);
  };
  const std::size_t sline = key_line.count("strategy") ? key_line["strategy"] : 0;
  if (strategy == "sync") {
    reject_param("strategy.pull_every", pull_every);
    reject_param("strategy.local", local);
    reject_param("strategy.global", global);
    cfg.strategy = sim::Sync{};
  } else if (strategy == "sync_stale") {
    reject_param("strategy.local", local);
    reject_param("strategy.global", global);
    cfg.strategy = sim::SyncStale{pull_every.value_or(1)};
  } else if (strategy == "async") {
    reject_param("strategy.pull_every", pull_every);
    reject_param("strategy.local", local);
    reject_param("strategy.global", global);
    cfg.strategy = sim::Async{};
  } else if (strategy == "local_accum") {
    reject_param("strategy.pull_every", pull_every);
    reject_param("strategy.global", global);
    cfg.strategy = sim::LocalAccum{local.value_or(1)};
  } else if (strategy == "global_accum") {
    reject_param("strategy.pull_every", pull_every);
    reject_param("strategy.local", local);
    cfg.strategy = sim::GlobalAccum{global.value_or(1)};
  } else if (strategy == "combined") {
    reject_param("strategy.pull_every", pull_every);
    cfg.strategy = sim::Combined{local.value_or(1), global.value_or(1)};
  } else {
    throw ConfigError("strategy: expected sync, sync_stale, async, local_accum, global_accum or combined", sline);
  }

  if (compute == "constant") {
    if (key_line.count("compute.stddev")) throw ConfigError("compute.stddev requires compute = normal", key_line["compute.stddev"]);
    cfg.compute = ConstantTime{compute_mean};
  } else if (compute == "normal") {
    cfg.compute = NormalTime{compute_mean, compute_stddev};
  } else {
    throw ConfigError("compute: expected constant or normal", key_line["compute"]);
  }

  try {
    cfg.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

inline ExperimentConfig parse_config(std::string_view text) { return config_from_entries(tokenize_config(text)); }

/// Applies `key=value` overrides on top of a document and parses the result.
inline ExperimentConfig parse_config(std::string_view text, const KeyValues& overrides) {
  auto entries = tokenize_config(text);
  for (const auto& [k, v] : overrides) {
    bool replaced = false;
    for (auto& e : entries) {
      if (e.key == k) {
        e.value = v;
        replaced = true;
      }
    }
    if (!replaced) entries.push_back({k, v, 0});
  }
  return config_from_entries(entries);
}

/// Canonical document listing every key; parse_config() of the output
/// reproduces `cfg` exactly.
inline KeyValues config_to_pairs(const ExperimentConfig& cfg) {
  using detail::fmt_double;
  KeyValues kv;
  auto put = [&](std::string k, std::string v) { kv.emplace_back(std::move(k), std::move(v)); };
  auto num = [](auto x) { return std::to_string(x); };
  const auto& o = cfg.objective;
  put("objective", models::to_string(o.kind));
  put("objective.dim", num(o.dim));
  put("objective.condition", fmt_double(o.condition));
  put("objective.rotate", o.rotate ? "true" : "false");
  put("objective.noise_sigma", fmt_double(o.noise_sigma));
  put("objective.label_noise", fmt_double(o.label_noise));
  put("objective.inputs", num(o.inputs));
  put("objective.hidden", num(o.hidden));
  put("objective.classes", num(o.classes));
  put("objective.seed", num(o.seed));
  put("data.samples", num(cfg.data.samples));
  put("data.cost_min", num(cfg.data.cost_min));
  put("data.cost_max", num(cfg.data.cost_max));
  put("data.budget", num(cfg.batch_budget));
  put("data.probe_samples", num(cfg.data.probe_samples));
  put("data.probe_seed", num(cfg.data.probe_seed));
  put("workers", num(cfg.workers));
  put("strategy", sim::kind_name(cfg.strategy));
  if (const auto* s = std::get_if<sim::SyncStale>(&cfg.strategy)) put("strategy.pull_every", num(s->pull_every));
  if (const auto* s = std::get_if<sim::LocalAccum>(&cfg.strategy)) put("strategy.local", num(s->local));
  if (const auto* s = std::get_if<sim::GlobalAccum>(&cfg.strategy)) put("strategy.global", num(s->global));
  if (const auto* s = std::get_if<sim::Combined>(&cfg.strategy)) {
    put("strategy.local", num(s->local));
    put("strategy.global", num(s->global));
  }
  put("combine", cfg.combine == CombineMode::kMean ? "mean" : "sum");
  put("optimizer", cfg.optimizer == OptimizerKind::kAdam ? "adam" : "sgd");
  put("adam.beta1", fmt_double(cfg.adam.beta1));
  put("adam.beta2", fmt_double(cfg.adam.beta2));
  put("adam.epsilon", fmt_double(cfg.adam.epsilon));
  put("lr.base", fmt_double(cfg.lr.base_lr));
  put("lr.warmup", num(cfg.lr.warmup_updates));
  put("lr.decay", cfg.lr.decay == LrDecay::kNone ? "none" : "inverse_sqrt");
  put("lr.batch_scale", fmt_double(cfg.lr.batch_scale_factor));
  if (const auto* c = std::get_if<ConstantTime>(&cfg.compute)) {
    put("compute", "constant");
    put("compute.mean", fmt_double(c->mean));
  } else {
    const auto& n = std::get<NormalTime>(cfg.compute);
    put("compute", "normal");
    put("compute.mean", fmt_double(n.mean));
    put("compute.stddev", fmt_double(n.stddev));
  }
  put("comm.latency", fmt_double(cfg.latency));
  put("stagger", cfg.stagger ? "true" : "false");
  put("budget.updates", num(cfg.max_updates));
  put("budget.pushes", num(cfg.max_pushes));
  put("budget.time", fmt_double(cfg.max_time));
  put("seed", num(cfg.seed));
  put("staleness.warmup", num(cfg.staleness_warmup));
  put("probe.every", num(cfg.probe_every));
  std::string th;
  for (std::size_t i = 0; i < cfg.thresholds.size(); ++i) th += (i ? "," : "") + fmt_double(cfg.thresholds[i]);
  put("report.thresholds", th);
  if (cfg.reference_loss) put("report.reference_loss", fmt_double(*cfg.reference_loss));
  put("parallel", cfg.parallel ? "true" : "false");
  put("parallel.time_scale", fmt_double(cfg.parallel_time_scale));
  if (!cfg.out_dir.empty()) put("output.dir", cfg.out_dir);
  put("output.name", cfg.name);
  return kv;
}

inline std::string serialize_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : config_to_pairs(cfg)) out += k + " = " + v + "\n";
  return out;
}

}  // namespace asgd::harness
