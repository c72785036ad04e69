#pragma once

#include <cmath>
#include <limits>

#include "tstcnn/core/kink_probe.hpp"
#include "tstcnn/nn/module.hpp"

namespace tstcnn::nn {

enum class ActivationKind { relu, sigmoid };

template <typename T>
T sigmoid_scalar(T x) {
  // Kept strictly inside (0, 1) even where exp saturates in T.
  const T lo = std::numeric_limits<T>::min();
  const T hi = std::nextafter(T(1), T(0));
  const T y = x >= T(0) ? T(1) / (T(1) + std::exp(-x)) : std::exp(x) / (T(1) + std::exp(x));
  return std::min(std::max(y, lo), hi);
}

template <typename T>
Tensor<T> activation_forward(const Tensor<T>& x, ActivationKind kind) {
  Tensor<T> y(x.shape());
  if (kind == ActivationKind::relu) {
    probe_signs<T>(x.values());
    for (std::size_t i = 0; i < x.numel(); ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
  } else {
    for (std::size_t i = 0; i < x.numel(); ++i) y[i] = sigmoid_scalar(x[i]);
  }
  return y;
}

/// relu uses the input (derivative 0 at x == 0); sigmoid uses its output y: y(1 - y).
template <typename T>
Tensor<T> activation_backward(const Tensor<T>& cached, const Tensor<T>& grad_out,
                              ActivationKind kind) {
  tstcnn::detail::require_shape(cached.shape() == grad_out.shape(),
                                "activation grad_out shape mismatch");
  Tensor<T> g(grad_out.shape());
  if (kind == ActivationKind::relu) {
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] = cached[i] > T(0) ? grad_out[i] : T(0);
  } else {
    for (std::size_t i = 0; i < g.numel(); ++i)
      g[i] = grad_out[i] * cached[i] * (T(1) - cached[i]);
  }
  return g;
}

template <typename T>
class Activation {
 public:
  explicit Activation(ActivationKind kind = ActivationKind::relu) : kind_(kind) {}

  Tensor<T> forward(const Tensor<T>& x, Mode mode) {
    Tensor<T> y = activation_forward(x, kind_);
    if (mode == Mode::train) cached_ = kind_ == ActivationKind::relu ? x : y;
    return y;
  }

  Tensor<T> backward(const Tensor<T>& grad_out) const {
    tstcnn::detail::require(!cached_.empty(), "activation backward called before forward");
    return activation_backward(cached_, grad_out, kind_);
  }

 private:
  ActivationKind kind_;
  Tensor<T> cached_;
};

}  // namespace tstcnn::nn
