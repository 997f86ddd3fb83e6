#pragma once

#include <stdexcept>
#include <string>

namespace rsdrl {

/// Raised when an argument violates a documented precondition.
class InvalidParameter : public std::invalid_argument {
 public:
  explicit InvalidParameter(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised when a computation leaves the representable floating-point range.
class NumericRangeError : public std::range_error {
 public:
  explicit NumericRangeError(const std::string& what) : std::range_error(what) {}
};

/// Raised when a distribution table grows beyond its configured support cap.
class CapacityError : public std::runtime_error {
 public:
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when an input file cannot be parsed or fails validation.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rsdrl
