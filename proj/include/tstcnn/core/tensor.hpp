#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <type_traits>
#include <vector>

#include "tstcnn/core/shape.hpp"

namespace tstcnn {

/// Accumulator for reductions: double, or T itself when T is wider.
template <typename T>
using Accum = std::conditional_t<(sizeof(T) > sizeof(double)), T, double>;

/// Dense row-major tensor. Default-constructed tensors are empty placeholders.
template <typename T = float>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape) : shape_(std::move(shape)), data_(shape_.numel(), T(0)) {}
  Tensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
    detail::require_shape(data_.size() == shape_.numel(),
                          "tensor data length does not match shape " + shape_.str());
  }

  static Tensor filled(const Shape& shape, T value) {
    Tensor t(shape);
    std::fill(t.data_.begin(), t.data_.end(), value);
    return t;
  }
  static Tensor zeros_like(const Tensor& other) { return Tensor(other.shape_); }

  const Shape& shape() const { return shape_; }
  std::size_t dim(std::size_t axis) const { return shape_[axis]; }
  std::size_t rank() const { return shape_.rank(); }
  std::size_t numel() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> values() & { return data_; }
  std::span<const T> values() const& { return data_; }
  std::span<const T> values() && = delete;  // would dangle
  const std::vector<T>& vector() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }
  T& at(const std::vector<std::size_t>& coords) { return data_[shape_.flat_index(coords)]; }
  const T& at(const std::vector<std::size_t>& coords) const {
    return data_[shape_.flat_index(coords)];
  }

  Tensor reshaped(Shape shape) const {
    detail::require_shape(shape.numel() == numel(), "reshape changes element count");
    return Tensor(std::move(shape), data_);
  }

  template <typename U>
  Tensor<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return Tensor<U>(shape_, std::move(out));
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
  }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  Shape shape_;
  std::vector<T> data_;
};

using Tensorf = Tensor<float>;
using Tensord = Tensor<double>;

}  // namespace tstcnn
