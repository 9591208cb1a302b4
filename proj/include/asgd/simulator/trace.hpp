// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "asgd/core/error.hpp"
#include "asgd/core/vector.hpp"

namespace asgd::sim {

/// One row per push received by the server.
struct TraceRow {
  std::uint64_t update_idx = 0;  // server version after handling the push
  double sim_time_s = 0.0;
  std::uint64_t pushes = 0;  // pushes received so far, this one included
  std::uint64_t staleness = 0;
  double loss_probe = 0.0;
  double lr = 0.0;
  std::string strategy;
  std::uint64_t worker_id = 0;

  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

enum class RunStatus { kOk, kDiverged };

struct RunTrace {
  std::vector<TraceRow> rows;
  RunStatus status = RunStatus::kOk;
  std::string diagnostic;
  ParamVector final_theta;
  double initial_loss = 0.0;
  std::uint64_t updates = 0;
  std::uint64_t pushes = 0;
  std::uint64_t computes = 0;
  std::int64_t cost_processed = 0;
  double end_time_s = 0.0;
  double comm_time_s = 0.0;
  std::uint64_t warmup_pushes = 0;
};

/// Traces agree on every numeric column and the final parameters. The
/// strategy label is ignored so equivalent strategies compare equal.
inline bool same_trajectory(const RunTrace& a, const RunTrace& b) {
  if (a.rows.size() != b.rows.size() || !(a.final_theta == b.final_theta)) return false;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    TraceRow x = a.rows[i], y = b.rows[i];
    x.strategy.clear();
    y.strategy.clear();
    if (!(x == y)) return false;
  }
  return a.status == b.status && a.updates == b.updates && a.pushes == b.pushes;
}

struct StalenessSummary {
  double mean = 0.0;
  std::map<std::uint64_t, std::uint64_t> histogram;
  std::uint64_t count = 0;
};

/// Exact mean and histogram of per-push staleness after skipping `warmup`
/// pushes (cold-start pushes see artificially low staleness).
inline StalenessSummary staleness_summary(const std::vector<TraceRow>& rows, std::uint64_t warmup) {
  if (rows.size() <= warmup) throw InvalidArgument("trace has no pushes beyond the warmup prefix");
  StalenessSummary out;
  std::uint64_t sum = 0;
  for (std::size_t i = warmup; i < rows.size(); ++i) {
    sum += rows[i].staleness;
    ++out.histogram[rows[i].staleness];
    ++out.count;
  }
  out.mean = static_cast<double>(sum) / static_cast<double>(out.count);
  return out;
}

inline StalenessSummary staleness_summary(const RunTrace& trace) {
  return staleness_summary(trace.rows, trace.warmup_pushes);
}

// CSV layout. The first line carries the schema version.
inline constexpr const char* kTraceSchema = "# asgd-trace schema=1";
inline constexpr const char* kTraceHeader = "update_idx,sim_time_s,pushes,staleness,loss_probe,lr,strategy,worker_id";

namespace detail {
inline std::string fmt_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}
}  // namespace detail

inline void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& rows) {
  os << kTraceSchema << '\n' << kTraceHeader << '\n';
  for (const auto& r : rows) {
    os << r.update_idx << ',' << detail::fmt_double(r.sim_time_s) << ',' << r.pushes << ',' << r.staleness << ','
       << detail::fmt_double(r.loss_probe) << ',' << detail::fmt_double(r.lr) << ',' << r.strategy << ','
       << r.worker_id << '\n';
  }
}

inline std::vector<TraceRow> read_trace_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kTraceSchema) throw Error("trace csv: missing or unsupported schema line");
  if (!std::getline(is, line) || line != kTraceHeader) throw Error("trace csv: unexpected header");
  std::vector<TraceRow> rows;
  std::size_t lineno = 2;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 8) throw Error("trace csv: line " + std::to_string(lineno) + " has wrong column count");
    try {
      TraceRow r;
      r.update_idx = std::stoull(cells[0]);
      r.sim_time_s = std::stod(cells[1]);
      r.pushes = std::stoull(cells[2]);
      r.staleness = std::stoull(cells[3]);
      r.loss_probe = std::stod(cells[4]);
      r.lr = std::stod(cells[5]);
      r.strategy = cells[6];
      r.worker_id = std::stoull(cells[7]);
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw Error("trace csv: unparseable value on line " + std::to_string(lineno));
    }
  }
  return rows;
}

}  // namespace asgd::sim
