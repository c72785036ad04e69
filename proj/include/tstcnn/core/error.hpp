#pragma once

#include <stdexcept>
#include <string>

namespace tstcnn {

// Bad input: wrong shapes, out-of-range labels, malformed files or flags.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

class ShapeError : public ValidationError {
 public:
  explicit ShapeError(const std::string& what) : ValidationError(what) {}
};

// Numeric failure discovered while running (NaN/Inf values, diverging training).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {
inline void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}
inline void require_shape(bool condition, const std::string& message) {
  if (!condition) throw ShapeError(message);
}
}  // namespace detail

}  // namespace tstcnn
