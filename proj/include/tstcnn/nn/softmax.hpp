#pragma once

#include <algorithm>
#include <cmath>

#include "tstcnn/nn/module.hpp"

namespace tstcnn::nn {

/// Row-wise softmax over [B, K] with row-max subtraction.
template <typename T>
Tensor<T> softmax_forward(const Tensor<T>& logits) {
  tstcnn::detail::require_shape(logits.rank() == 2 && logits.dim(1) >= 2,
                                "softmax expects [B, K] with K >= 2, got " + logits.shape().str());
  if (!logits.all_finite()) throw NumericError("softmax received non-finite logits");
  const std::size_t B = logits.dim(0), K = logits.dim(1);
  Tensor<T> p(logits.shape());
  for (std::size_t b = 0; b < B; ++b) {
    const T* row = logits.data() + b * K;
    const Accum<T> m = Accum<T>(*std::max_element(row, row + K));
    Accum<T> total = 0.0;
    std::vector<Accum<T>> e(K);
    for (std::size_t k = 0; k < K; ++k) total += e[k] = std::exp(Accum<T>(row[k]) - m);
    for (std::size_t k = 0; k < K; ++k) p[b * K + k] = T(e[k] / total);
  }
  return p;
}

/// dx = y * (dy - sum(dy * y)) per row.
template <typename T>
Tensor<T> softmax_backward(const Tensor<T>& probs, const Tensor<T>& grad_out) {
  tstcnn::detail::require_shape(probs.shape() == grad_out.shape(), "softmax grad shape mismatch");
  const std::size_t B = probs.dim(0), K = probs.dim(1);
  Tensor<T> g(probs.shape());
  for (std::size_t b = 0; b < B; ++b) {
    Accum<T> s = 0.0;
    for (std::size_t k = 0; k < K; ++k) s += Accum<T>(grad_out[b * K + k]) * Accum<T>(probs[b * K + k]);
    for (std::size_t k = 0; k < K; ++k)
      g[b * K + k] = T(Accum<T>(probs[b * K + k]) * (Accum<T>(grad_out[b * K + k]) - s));
  }
  return g;
}

}  // namespace tstcnn::nn
