// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace asgd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  DimensionMismatch(std::size_t expected, std::size_t got)
      : Error("dimension mismatch: expected " + std::to_string(expected) +
              ", got " + std::to_string(got)) {}
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Raised when a gradient or parameter vector stops being finite.
class NonFinite : public Error {
 public:
  using Error::Error;
};

}  // namespace asgd
