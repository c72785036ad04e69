#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tstcnn/core/ops.hpp"
#include "tstcnn/nn/module.hpp"

namespace tstcnn::nn {

/// out[b, j] = x1[b]^T W[j] x2[b] + bias[j].
template <typename T>
class BilinearFusion {
 public:
  BilinearFusion() = default;
  BilinearFusion(std::size_t d1, std::size_t d2, std::size_t n_classes)
      : weight_(Shape{n_classes, d1, d2}), bias_(Shape{n_classes}) {
    tstcnn::detail::require(n_classes >= 2, "bilinear fusion needs at least 2 classes");
  }

  void init(Rng& rng) {
    init_uniform_fan_in(weight_.value, d1(), rng);
    init_uniform_fan_in(bias_.value, d1(), rng);
  }

  std::size_t n_classes() const { return weight_.value.dim(0); }
  std::size_t d1() const { return weight_.value.dim(1); }
  std::size_t d2() const { return weight_.value.dim(2); }

  Tensor<T> forward(const Tensor<T>& x1, const Tensor<T>& x2, Mode mode) {
    check_inputs(x1, x2);
    const std::size_t B = x1.dim(0), K = n_classes(), P = d1(), Q = d2();
    Tensor<T> y(Shape{B, K});
    parallel_for(K, [&](std::size_t j) {
      const T* w = weight_.value.data() + j * P * Q;
      for (std::size_t b = 0; b < B; ++b) {
        const T* a = x1.data() + b * P;
        const T* c = x2.data() + b * Q;
        Accum<T> s = 0.0;
        for (std::size_t p = 0; p < P; ++p) s += Accum<T>(a[p]) * tstcnn::detail::dot(w + p * Q, c, Q);
        y[b * K + j] = T(s + Accum<T>(bias_.value[j]));
      }
    });
    if (mode == Mode::train) {
      x1_ = x1;
      x2_ = x2;
    }
    return y;
  }

  /// Returns (grad_x1, grad_x2); parameter gradients accumulate.
  std::pair<Tensor<T>, Tensor<T>> backward(const Tensor<T>& grad_out) {
    tstcnn::detail::require(!x1_.empty(), "bilinear backward called before a train-mode forward");
    const std::size_t B = x1_.dim(0), K = n_classes(), P = d1(), Q = d2();
    tstcnn::detail::require_shape(grad_out.shape() == Shape{B, K},
                                  "bilinear grad_out shape mismatch");
    Tensor<T> g1(x1_.shape()), g2(x2_.shape());
    parallel_for(K, [&](std::size_t j) {
      T* gw = weight_.grad.data() + j * P * Q;
      Accum<T> gb = 0.0;
      for (std::size_t b = 0; b < B; ++b) {
        const T g = grad_out[b * K + j];
        gb += Accum<T>(g);
        const T* a = x1_.data() + b * P;
        const T* c = x2_.data() + b * Q;
        for (std::size_t p = 0; p < P; ++p) tstcnn::detail::axpy(T(g * a[p]), c, gw + p * Q, Q);
      }
      bias_.grad[j] += T(gb);
    });
    for (std::size_t b = 0; b < B; ++b) {
      const T* a = x1_.data() + b * P;
      const T* c = x2_.data() + b * Q;
      T* ga = g1.data() + b * P;
      std::vector<Accum<T>> gc(Q, 0.0);
      for (std::size_t j = 0; j < K; ++j) {
        const T g = grad_out[b * K + j];
        if (g == T(0)) continue;
        const T* w = weight_.value.data() + j * P * Q;
        for (std::size_t p = 0; p < P; ++p) {
          ga[p] += T(Accum<T>(g) * tstcnn::detail::dot(w + p * Q, c, Q));
          const Accum<T> gap = Accum<T>(g) * Accum<T>(a[p]);
          for (std::size_t q = 0; q < Q; ++q) gc[q] += gap * Accum<T>(w[p * Q + q]);
        }
      }
      for (std::size_t q = 0; q < Q; ++q) g2[b * Q + q] = T(gc[q]);
    }
    return {std::move(g1), std::move(g2)};
  }

  void register_parameters(ParameterSet<T>& set, const std::string& prefix) {
    set.add(join(prefix, "weight"), weight_);
    set.add(join(prefix, "bias"), bias_);
  }

  Parameter<T>& weight() { return weight_; }
  Parameter<T>& bias() { return bias_; }

 private:
  void check_inputs(const Tensor<T>& x1, const Tensor<T>& x2) const {
    tstcnn::detail::require_shape(x1.rank() == 2 && x1.dim(1) == d1(),
                                  "bilinear x1 must be [B, " + std::to_string(d1()) + "], got " +
                                      x1.shape().str());
    tstcnn::detail::require_shape(x2.rank() == 2 && x2.dim(1) == d2() && x2.dim(0) == x1.dim(0),
                                  "bilinear x2 must be [B, " + std::to_string(d2()) + "], got " +
                                      x2.shape().str());
  }

  Parameter<T> weight_;
  Parameter<T> bias_;
  Tensor<T> x1_;
  Tensor<T> x2_;
};

}  // namespace tstcnn::nn
