#pragma once

#include <stdexcept>
#include <string>

namespace wasslearn {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Problem size exceeds a documented cap (atom counts, net cardinality).
class SizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Input measure or weight vector is not a probability vector.
class NormalizationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A quantity required by a formula is degenerate (zero true error, missing m/M).
class DegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two hypotheses live on different knot grids.
class GridMismatchError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wasslearn
