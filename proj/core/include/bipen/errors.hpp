#pragma once

#include <stdexcept>
#include <string>

namespace bipen {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector or matrix shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A point lies outside the domain of a nonsmooth term (the function is +inf there).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An iteration budget was hit before the termination test passed.
class SafeguardExhausted : public Error {
 public:
  using Error::Error;
};

/// A caller-supplied stop predicate fired (wall-clock budget).
class Cancelled : public Error {
 public:
  using Error::Error;
};

/// An oracle returned NaN or Inf.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// A persisted file does not match the expected schema or version.
class SchemaError : public Error {
 public:
  using Error::Error;
};

}  // namespace bipen
