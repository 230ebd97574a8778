#pragma once

#include <stdexcept>
#include <string>

namespace cnls {

/// Base for all library errors.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// Two operands live on different grids.
class GridMismatch : public Error {
public:
  using Error::Error;
};

/// Lagrange multiplier requested for a component with zero mass.
class UndefinedMultiplier : public Error {
public:
  using Error::Error;
};

}  // namespace cnls
