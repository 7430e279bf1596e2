#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dirsim {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class NegativeComponent : public Error {
 public:
  NegativeComponent(std::size_t index, double value)
      : Error("component " + std::to_string(index) + " is negative (" +
              std::to_string(value) + ")"),
        index_(index),
        value_(value) {}
  std::size_t index() const noexcept { return index_; }
  double value() const noexcept { return value_; }

 private:
  std::size_t index_;
  double value_;
};

class SumExceedsOne : public Error {
 public:
  explicit SumExceedsOne(double sum)
      : Error("components sum to " + std::to_string(sum) + " > 1"), sum_(sum) {}
  double sum() const noexcept { return sum_; }

 private:
  double sum_;
};

class InvalidCoefficients : public Error {
 public:
  using Error::Error;
};

// (b/kappa)(1-S) differs between components beyond the accepted tolerance.
class ConstraintViolated : public Error {
 public:
  explicit ConstraintViolated(double deviation)
      : Error("(b/kappa)(1-S) is not equal across components; max relative deviation " +
              std::to_string(deviation)),
        deviation_(deviation) {}
  double deviation() const noexcept { return deviation_; }

 private:
  double deviation_;
};

class BoundaryDivergence : public Error {
 public:
  using Error::Error;
};

class FactorizationFailure : public Error {
 public:
  using Error::Error;
};

class SingularDiffusion : public Error {
 public:
  using Error::Error;
};

class EmptyEnsemble : public Error {
 public:
  EmptyEnsemble() : Error("ensemble is empty") {}
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class InfeasibleInitialCondition : public Error {
 public:
  using Error::Error;
};

// Raised by the integrator when a particle leaves the reals; always a bug.
class NonFiniteState : public Error {
 public:
  using Error::Error;
};

}  // namespace dirsim
