#pragma once

#include <cstddef>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "tstcnn/core/error.hpp"

namespace tstcnn {

/// Ordered list of axis extents. Every extent is at least 1.
class Shape {
 public:
  Shape() = default;
  Shape(std::initializer_list<std::size_t> dims) : dims_(dims) { validate(); }
  explicit Shape(std::vector<std::size_t> dims) : dims_(std::move(dims)) { validate(); }

  std::size_t rank() const { return dims_.size(); }
  std::size_t operator[](std::size_t axis) const { return dims_.at(axis); }
  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t numel() const { return numel_; }

  /// Row-major strides, last axis fastest.
  std::vector<std::size_t> strides() const {
    std::vector<std::size_t> s(dims_.size(), 1);
    for (std::size_t i = dims_.size(); i-- > 1;) s[i - 1] = s[i] * dims_[i];
    return s;
  }

  std::size_t flat_index(const std::vector<std::size_t>& coords) const {
    detail::require_shape(coords.size() == dims_.size(), "coordinate rank mismatch");
    std::size_t index = 0;
    for (std::size_t i = 0; i < dims_.size(); ++i) {
      detail::require_shape(coords[i] < dims_[i], "coordinate out of range");
      index = index * dims_[i] + coords[i];
    }
    return index;
  }

  std::vector<std::size_t> coords_of(std::size_t flat) const {
    detail::require_shape(flat < numel_, "flat index out of range");
    std::vector<std::size_t> c(dims_.size());
    for (std::size_t i = dims_.size(); i-- > 0;) {
      c[i] = flat % dims_[i];
      flat /= dims_[i];
    }
    return c;
  }

  std::string str() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < dims_.size(); ++i) os << (i ? ", " : "") << dims_[i];
    os << ')';
    return os.str();
  }

  friend bool operator==(const Shape& a, const Shape& b) { return a.dims_ == b.dims_; }
  friend bool operator!=(const Shape& a, const Shape& b) { return !(a == b); }

 private:
  void validate() {
    numel_ = 1;
    for (std::size_t d : dims_) {
      detail::require_shape(d >= 1, "shape extents must be >= 1");
      if (numel_ > std::numeric_limits<std::size_t>::max() / d)
        throw ShapeError("shape element count overflows");
      numel_ *= d;
    }
  }

  std::vector<std::size_t> dims_;
  std::size_t numel_ = 1;
};

}  // namespace tstcnn
