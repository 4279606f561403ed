#pragma once

#include <stdexcept>
#include <string>

namespace hjbd {

// Bad input: wrong dimension, parameter out of range, malformed file.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical procedure could not deliver a result of the requested quality.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, double residual)
      : NumericalError(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// A discrete transform attained its extremum on the edge of its grid.
class GridError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class RefinementError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace hjbd
