#pragma once

#include <string>

#include "tstcnn/core/ops.hpp"
#include "tstcnn/nn/module.hpp"

namespace tstcnn::nn {

/// y = W x + b over a batch; inputs of any rank are flattened to [B, in].
template <typename T>
class Linear {
 public:
  Linear() = default;
  Linear(std::size_t in_features, std::size_t out_features)
      : weight_(Shape{out_features, in_features}), bias_(Shape{out_features}) {}

  void init(Rng& rng) {
    init_uniform_fan_in(weight_.value, in_features(), rng);
    init_uniform_fan_in(bias_.value, in_features(), rng);
  }

  std::size_t in_features() const { return weight_.value.dim(1); }
  std::size_t out_features() const { return weight_.value.dim(0); }

  Tensor<T> forward(const Tensor<T>& x, Mode mode) {
    const std::size_t B = x.dim(0), in = in_features(), out = out_features();
    tstcnn::detail::require_shape(x.numel() == B * in,
                                  "linear expects " + std::to_string(in) +
                                      " features per sample, got input " + x.shape().str());
    Tensor<T> y(Shape{B, out});
    parallel_for(out, [&](std::size_t o) {
      const T* w = weight_.value.data() + o * in;
      for (std::size_t b = 0; b < B; ++b)
        y[b * out + o] = T(tstcnn::detail::dot(w, x.data() + b * in, in) + Accum<T>(bias_.value[o]));
    });
    if (mode == Mode::train) input_ = x;
    return y;
  }

  Tensor<T> backward(const Tensor<T>& grad_out) {
    tstcnn::detail::require(!input_.empty(), "linear backward called before a train-mode forward");
    const std::size_t B = input_.dim(0), in = in_features(), out = out_features();
    tstcnn::detail::require_shape(grad_out.shape() == Shape{B, out}, "linear grad_out shape mismatch");
    parallel_for(out, [&](std::size_t o) {
      T* gw = weight_.grad.data() + o * in;
      Accum<T> gb = 0.0;
      for (std::size_t b = 0; b < B; ++b) {
        const T g = grad_out[b * out + o];
        gb += Accum<T>(g);
        tstcnn::detail::axpy(g, input_.data() + b * in, gw, in);
      }
      bias_.grad[o] += T(gb);
    });
    Tensor<T> grad_in(input_.shape());
    for (std::size_t b = 0; b < B; ++b) {
      T* gx = grad_in.data() + b * in;
      for (std::size_t o = 0; o < out; ++o)
        tstcnn::detail::axpy(grad_out[b * out + o], weight_.value.data() + o * in, gx, in);
    }
    return grad_in;
  }

  void register_parameters(ParameterSet<T>& set, const std::string& prefix) {
    set.add(join(prefix, "weight"), weight_);
    set.add(join(prefix, "bias"), bias_);
  }

  Parameter<T>& weight() { return weight_; }
  Parameter<T>& bias() { return bias_; }

 private:
  Parameter<T> weight_;
  Parameter<T> bias_;
  Tensor<T> input_;
};

}  // namespace tstcnn::nn
