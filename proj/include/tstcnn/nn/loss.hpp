#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "tstcnn/nn/module.hpp"

namespace tstcnn::nn {

inline constexpr double kProbabilityFloor = 1e-12;

namespace detail {
template <typename T>
void check_labels(const Tensor<T>& probs, const std::vector<std::size_t>& labels) {
  tstcnn::detail::require_shape(probs.rank() == 2 && probs.dim(0) == labels.size(),
                                "cross entropy expects one label per row");
  for (std::size_t l : labels)
    tstcnn::detail::require(l < probs.dim(1), "label " + std::to_string(l) + " out of range [0, " +
                                                  std::to_string(probs.dim(1)) + ")");
}
}  // namespace detail

/// Mean over the batch of -log(max(p[label], 1e-12)).
template <typename T>
double cross_entropy(const Tensor<T>& probs, const std::vector<std::size_t>& labels) {
  detail::check_labels(probs, labels);
  const std::size_t B = probs.dim(0), K = probs.dim(1);
  Accum<T> loss = 0.0;
  for (std::size_t b = 0; b < B; ++b)
    loss -= std::log(std::max(Accum<T>(probs[b * K + labels[b]]), Accum<T>(kProbabilityFloor)));
  return loss / double(B);
}

/// d loss / d probs (the clamp is treated as inactive).
template <typename T>
Tensor<T> cross_entropy_backward(const Tensor<T>& probs, const std::vector<std::size_t>& labels) {
  detail::check_labels(probs, labels);
  const std::size_t B = probs.dim(0), K = probs.dim(1);
  Tensor<T> g(probs.shape());
  for (std::size_t b = 0; b < B; ++b)
    g[b * K + labels[b]] =
        T(-1.0 / (Accum<T>(B) * std::max(Accum<T>(probs[b * K + labels[b]]), Accum<T>(kProbabilityFloor))));
  return g;
}

/// Combined softmax + cross-entropy gradient with respect to the logits: (p - onehot) / B.
template <typename T>
Tensor<T> softmax_cross_entropy_backward(const Tensor<T>& probs,
                                         const std::vector<std::size_t>& labels) {
  detail::check_labels(probs, labels);
  const std::size_t B = probs.dim(0), K = probs.dim(1);
  Tensor<T> g(probs.shape());
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t k = 0; k < K; ++k)
      g[b * K + k] = T((Accum<T>(probs[b * K + k]) - (k == labels[b] ? 1.0 : 0.0)) / Accum<T>(B));
  return g;
}

}  // namespace tstcnn::nn
