// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "asgd/core/error.hpp"
#include "asgd/models/sample.hpp"

namespace asgd::models {

// Text dump: one sample per line, comma-separated: cost, target, features...
// preceded by a header line "cost,target,f0,f1,...".
//
// Binary dump, little-endian:
//   char[8]  magic "ASGDDS1\0"
//   uint64   sample count
//   uint64   feature count
//   per sample: int64 cost, float64 target, float64 features[feature count]

inline constexpr char kDatasetMagic[8] = {'A', 'S', 'G', 'D', 'D', 'S', '1', '\0'};

namespace detail {

template <class T>
void put_le(std::ostream& os, T value) {
  static_assert(std::endian::native == std::endian::little, "binary dump assumes a little-endian host");
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  os.write(buf, sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
  char buf[sizeof(T)];
  if (!is.read(buf, sizeof(T))) throw Error("truncated dataset dump");
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

inline std::size_t feature_count(std::span<const Sample> samples) {
  const std::size_t n = samples.empty() ? 0 : samples.front().features.size();
  for (const auto& s : samples) {
    if (s.features.size() != n) throw InvalidArgument("samples have ragged feature counts");
  }
  return n;
}

}  // namespace detail

inline void write_dataset_text(std::ostream& os, std::span<const Sample> samples) {
  const std::size_t nf = detail::feature_count(samples);
  os << "cost,target";
  for (std::size_t i = 0; i < nf; ++i) os << ",f" << i;
  os << '\n';
  os.precision(17);
  for (const auto& s : samples) {
    os << s.cost << ',' << s.target;
    for (double x : s.features) os << ',' << x;
    os << '\n';
  }
}

inline std::vector<Sample> read_dataset_text(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error("empty dataset dump");
  const auto columns = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  if (columns < 2 || line.rfind("cost,target", 0) != 0) throw Error("bad dataset header");
  std::vector<Sample> out;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() != columns) throw Error("dataset line " + std::to_string(lineno) + ": wrong column count");
    Sample s;
    try {
      s.cost = std::stoll(cells[0]);
      s.target = std::stod(cells[1]);
      for (std::size_t i = 2; i < cells.size(); ++i) s.features.push_back(std::stod(cells[i]));
    } catch (const std::logic_error&) {
      throw Error("dataset line " + std::to_string(lineno) + ": not a number");
    }
    out.push_back(std::move(s));
  }
  return out;
}

inline void write_dataset_binary(std::ostream& os, std::span<const Sample> samples) {
  const std::size_t nf = detail::feature_count(samples);
  os.write(kDatasetMagic, sizeof(kDatasetMagic));
  detail::put_le<std::uint64_t>(os, samples.size());
  detail::put_le<std::uint64_t>(os, nf);
  for (const auto& s : samples) {
    detail::put_le<std::int64_t>(os, s.cost);
    detail::put_le<double>(os, s.target);
    for (double x : s.features) detail::put_le<double>(os, x);
  }
}

inline std::vector<Sample> read_dataset_binary(std::istream& is) {
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kDatasetMagic, 8) != 0) throw Error("bad dataset magic");
  const auto n = detail::get_le<std::uint64_t>(is);
  const auto nf = detail::get_le<std::uint64_t>(is);
  std::vector<Sample> out(n);
  for (auto& s : out) {
    s.cost = detail::get_le<std::int64_t>(is);
    s.target = detail::get_le<double>(is);
    s.features.resize(nf);
    for (double& x : s.features) x = detail::get_le<double>(is);
  }
  return out;
}

}  // namespace asgd::models
