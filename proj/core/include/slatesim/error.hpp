#pragma once

#include <stdexcept>
#include <string>

namespace slatesim {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid or out-of-range configuration value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Caller broke an operation's precondition (duplicate item, slot overflow...).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// Malformed input file.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Problem too large for the requested method.
class ResourceError : public Error {
 public:
  using Error::Error;
};

// Operation invoked on an object in the wrong state (e.g. unfitted model).
class StateError : public Error {
 public:
  using Error::Error;
};

}  // namespace slatesim

namespace slatesim {

// Training could not proceed (e.g. no samples were collected).
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace slatesim
