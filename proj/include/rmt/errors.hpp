#pragma once

#include <stdexcept>
#include <string>

namespace rmt {

// All library failures derive from rmt::Error so callers (the CLI in
// particular) can map them onto exit codes in one place.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Matrix dimension, bandwidth or index-set size out of range.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation (eta <= 0, t < 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Input data that violates a structural invariant (e.g. a non doubly
// stochastic variance profile).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

// A denominator of an exact resolvent identity is numerically zero.
class SingularityError : public Error {
 public:
  using Error::Error;
};

class SampleSizeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace rmt
