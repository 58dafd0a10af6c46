#pragma once

#include <stdexcept>
#include <string>

namespace sailor {

// Bad input: malformed bundle, inconsistent shapes, invalid configuration.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite values produced during optimization.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sailor
