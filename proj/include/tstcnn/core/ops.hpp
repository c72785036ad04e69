#pragma once

#include <cstddef>

#include "tstcnn/core/parallel.hpp"
#include "tstcnn/core/tensor.hpp"

namespace tstcnn {

enum class BinaryOp { add, mul };
enum class ScalarOp { add_scalar, scale };

namespace detail {

// Dot product with float-width partial sums folded into a double every 64 terms.
template <typename T>
Accum<T> dot(const T* a, const T* b, std::size_t n) {
  Accum<T> total = 0.0;
  std::size_t i = 0;
  for (; i + 64 <= n; i += 64) {
    T partial = 0;
    for (std::size_t j = 0; j < 64; ++j) partial += a[i + j] * b[i + j];
    total += static_cast<Accum<T>>(partial);
  }
  T partial = 0;
  for (; i < n; ++i) partial += a[i] * b[i];
  return total + static_cast<Accum<T>>(partial);
}

template <typename T>
Accum<T> sum(const T* a, std::size_t n) {
  Accum<T> total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += static_cast<Accum<T>>(a[i]);
  return total;
}

template <typename T>
void axpy(T alpha, const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace detail

template <typename T>
Tensor<T> elementwise(const Tensor<T>& a, const Tensor<T>& b, BinaryOp op) {
  detail::require_shape(a.shape() == b.shape(),
                        "elementwise shape mismatch " + a.shape().str() + " vs " + b.shape().str());
  Tensor<T> out(a.shape());
  const std::size_t n = a.numel();
  if (op == BinaryOp::add) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
  } else {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
  }
  return out;
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  return elementwise(a, b, BinaryOp::add);
}
template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  return elementwise(a, b, BinaryOp::mul);
}

template <typename T>
Tensor<T> scalar_broadcast(const Tensor<T>& a, T s, ScalarOp op) {
  Tensor<T> out(a.shape());
  const std::size_t n = a.numel();
  if (op == ScalarOp::add_scalar) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + s;
  } else {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * s;
  }
  return out;
}

template <typename T>
Tensor<T> add_scalar(const Tensor<T>& a, T s) {
  return scalar_broadcast(a, s, ScalarOp::add_scalar);
}
template <typename T>
Tensor<T> scale(const Tensor<T>& a, T s) {
  return scalar_broadcast(a, s, ScalarOp::scale);
}

// In-place accumulation used by backward passes.
template <typename T>
void accumulate(Tensor<T>& into, const Tensor<T>& value) {
  if (into.empty()) {
    into = value;
    return;
  }
  detail::require_shape(into.shape() == value.shape(), "accumulate shape mismatch");
  detail::axpy(T(1), value.data(), into.data(), into.numel());
}

/// [M,K] x [K,N] -> [M,N], rows accumulated in double.
template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  detail::require_shape(a.rank() == 2 && b.rank() == 2, "matmul expects rank-2 operands");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  detail::require_shape(b.dim(0) == k, "matmul inner extents differ: " + a.shape().str() +
                                           " x " + b.shape().str());
  Tensor<T> out(Shape{m, n});
  parallel_for(m, [&](std::size_t i) {
    std::vector<Accum<T>> row(n, 0.0);
    for (std::size_t p = 0; p < k; ++p) {
      const Accum<T> aip = static_cast<Accum<T>>(a[i * k + p]);
      const T* brow = b.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += aip * static_cast<Accum<T>>(brow[j]);
    }
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = static_cast<T>(row[j]);
  });
  return out;
}

}  // namespace tstcnn
