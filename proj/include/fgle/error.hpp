#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace fgle {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain where the operation is defined.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The circulant embedding of a Toeplitz covariance has a significantly
/// negative eigenvalue, so it is not a valid covariance.
class EmbeddingError : public Error {
 public:
  using Error::Error;
};

/// Dense factorization of a covariance matrix failed.
class FactorizationError : public Error {
 public:
  using Error::Error;
};

/// A sum-of-exponentials kernel could not be certified within the node budget.
class CertificationError : public Error {
 public:
  using Error::Error;
};

/// Numerical evaluation lost too much accuracy to be trusted.
class AccuracyError : public Error {
 public:
  using Error::Error;
};

/// A time-stepping scheme produced NaN or infinity.
class NonFiniteStateError : public Error {
 public:
  NonFiniteStateError(std::size_t step, const std::string& what)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Inputs to a solver or study do not fit together (grid, kernel, problem).
class MismatchError : public Error {
 public:
  using Error::Error;
};

/// Invalid study or run configuration; carries the offending field path.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace fgle
