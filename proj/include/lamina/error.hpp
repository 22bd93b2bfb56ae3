#pragma once

#include <stdexcept>
#include <string>

namespace lamina {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented invariant (set spec, parameters, config).
class ValidationError : public Error {
public:
  using Error::Error;
};

/// A point or path leaves the region where an evaluator is defined.
class DomainError : public Error {
public:
  using Error::Error;
};

/// Adaptive quadrature could not reach the requested tolerance.
class QuadratureError : public Error {
public:
  QuadratureError(const std::string& what, double achieved)
      : Error(what), achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

private:
  double achieved_;
};

class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace lamina
