#pragma once

#include <stdexcept>
#include <string>

namespace nehari {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed configuration, bad mesh bounds, unknown keys.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A function was evaluated outside the set where it is finite.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Caller broke a precondition (size mismatch, nonzero Dirichlet value, ...).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Non-finite integrand met while assembling an integral.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// Hypothesis violation that makes a problem ill-posed (H1 or H2).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A bracketing search exhausted its expansion budget.
class SearchFailure : public Error {
 public:
  using Error::Error;
};

/// The Nehari rescaling found no root along the current direction.
class ProjectionFailure : public Error {
 public:
  using Error::Error;
};

class EstimationError : public Error {
 public:
  using Error::Error;
};

class ContinuationError : public Error {
 public:
  using Error::Error;
};

}  // namespace nehari
