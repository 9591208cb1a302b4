// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "asgd/core/error.hpp"
#include "asgd/core/vector.hpp"

namespace asgd::optim {

inline ParamVector sgd_step(const ParamVector& theta, const ParamVector& g, double lr) {
  theta.check_same_dim(g);
  if (!(lr > 0.0)) throw InvalidArgument("sgd learning rate must be > 0");
  if (!theta.is_finite() || !g.is_finite()) throw NonFinite("non-finite input to sgd_step");
  return vec_axpy(-lr, g, theta);
}

}  // namespace asgd::optim
