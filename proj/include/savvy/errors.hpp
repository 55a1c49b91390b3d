#pragma once

#include <stdexcept>

namespace savvy {

// Input data violates the required structure (exit code 2 in the CLI).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Aggregated result files do not share a supported format version (exit code 3).
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numeric routine could not produce a usable answer (exit code 4).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace savvy
