// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "asgd/core/error.hpp"

namespace asgd {

/// Dense real vector with a dimension fixed at construction.
///
/// Element access is unchecked; whole-vector arithmetic checks dimensions
/// and throws DimensionMismatch.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::size_t dim, double fill = 0.0) : values_(dim, fill) {}
  ParamVector(std::initializer_list<double> init) : values_(init) {}
  explicit ParamVector(std::vector<double> values) : values_(std::move(values)) {}

  std::size_t dim() const noexcept { return values_.size(); }

  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  auto begin() noexcept { return values_.begin(); }
  auto end() noexcept { return values_.end(); }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  bool is_finite() const noexcept {
    for (double x : values_) {
      if (!std::isfinite(x)) return false;
    }
    return true;
  }

  void fill(double x) noexcept {
    for (double& v : values_) v = x;
  }

  void check_same_dim(const ParamVector& other) const {
    if (other.dim() != dim()) throw DimensionMismatch(dim(), other.dim());
  }

  ParamVector& operator+=(const ParamVector& o) {
    check_same_dim(o);
    for (std::size_t i = 0; i < dim(); ++i) values_[i] += o.values_[i];
    return *this;
  }
  ParamVector& operator-=(const ParamVector& o) {
    check_same_dim(o);
    for (std::size_t i = 0; i < dim(); ++i) values_[i] -= o.values_[i];
    return *this;
  }
  ParamVector& operator*=(double a) noexcept {
    for (double& v : values_) v *= a;
    return *this;
  }

  friend bool operator==(const ParamVector&, const ParamVector&) = default;

 private:
  std::vector<double> values_;
};

inline ParamVector operator+(ParamVector a, const ParamVector& b) { return a += b; }
inline ParamVector operator-(ParamVector a, const ParamVector& b) { return a -= b; }
inline ParamVector operator*(double s, ParamVector a) { return a *= s; }

/// Returns a*x + y.
inline ParamVector vec_axpy(double a, const ParamVector& x, const ParamVector& y) {
  y.check_same_dim(x);
  ParamVector out = y;
  for (std::size_t i = 0; i < out.dim(); ++i) out[i] += a * x[i];
  return out;
}

inline double dot(const ParamVector& x, const ParamVector& y) {
  x.check_same_dim(y);
  double s = 0.0;
  for (std::size_t i = 0; i < x.dim(); ++i) s += x[i] * y[i];
  return s;
}

inline double norm2(const ParamVector& x) { return std::sqrt(dot(x, x)); }

/// ||a - b|| / max(||a||, ||b||); zero when both vectors vanish.
inline double relative_error(const ParamVector& a, const ParamVector& b) {
  const double num = norm2(a - b);
  const double den = std::max(norm2(a), norm2(b));
  if (den == 0.0) return num;
  return num / den;
}

}  // namespace asgd
