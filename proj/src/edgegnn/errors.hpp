// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace edgegnn {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid caller input: bad sizes, empty lists, unknown names.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Tensor shapes that do not conform for the requested op.
class DimensionError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

/// Base-station placement could not satisfy the separation constraint.
class InfeasibleLayoutError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values where finite ones are required (e.g. training loss).
class NumericError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace edgegnn
