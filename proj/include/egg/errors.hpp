#pragma once

#include <stdexcept>
#include <string>

namespace egg {

/// Input outside an operation's mathematical domain (non-PD matrix,
/// non-positive variance, non-finite spectral value).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Bad configuration or arguments, detected before any data is touched.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or insufficient input data (files, panels).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace egg
