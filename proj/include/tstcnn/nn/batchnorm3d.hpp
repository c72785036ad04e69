#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "tstcnn/core/parallel.hpp"
#include "tstcnn/nn/module.hpp"

namespace tstcnn::nn {

struct BatchNormOptions {
  double epsilon = 1e-5;
  double momentum = 0.1;
};

/// Per-channel normalization over batch and all spatio-temporal positions.
/// Variance is the population variance; running statistics use the same estimator.
template <typename T>
class BatchNorm3d {
 public:
  BatchNorm3d() = default;
  explicit BatchNorm3d(std::size_t channels, BatchNormOptions options = {})
      : options_(options),
        gamma_(Shape{channels}),
        beta_(Shape{channels}),
        running_mean_(Shape{channels}),
        running_var_(Tensor<T>::filled(Shape{channels}, T(1))) {
    tstcnn::detail::require(options.epsilon > 0.0, "batchnorm epsilon must be > 0");
    tstcnn::detail::require(options.momentum > 0.0 && options.momentum < 1.0,
                            "batchnorm momentum must be in (0, 1)");
    gamma_.value.fill(T(1));
  }

  std::size_t channels() const { return gamma_.value.numel(); }

  Tensor<T> forward(const Tensor<T>& x, Mode mode) {
    tstcnn::detail::require_shape(x.rank() >= 2 && x.dim(1) == channels(),
                                  "batchnorm channel mismatch: expects " +
                                      std::to_string(channels()) + " channels, input " +
                                      x.shape().str());
    const std::size_t B = x.dim(0), C = channels(), inner = x.numel() / (B * C);
    const Accum<T> count = Accum<T>(B * inner);
    Tensor<T> out(x.shape());
    std::vector<Accum<T>> inv_std(C);

    if (mode == Mode::train) normalized_ = Tensor<T>(x.shape());
    parallel_for(C, [&](std::size_t c) {
      Accum<T> mean, var;
      if (mode == Mode::train) {
        Accum<T> s = 0.0;
        for (std::size_t b = 0; b < B; ++b) {
          const T* p = x.data() + (b * C + c) * inner;
          for (std::size_t i = 0; i < inner; ++i) s += Accum<T>(p[i]);
        }
        mean = s / count;
        Accum<T> sq = 0.0;
        for (std::size_t b = 0; b < B; ++b) {
          const T* p = x.data() + (b * C + c) * inner;
          for (std::size_t i = 0; i < inner; ++i) {
            const Accum<T> d = Accum<T>(p[i]) - mean;
            sq += d * d;
          }
        }
        var = sq / count;
        const Accum<T> m = options_.momentum;
        running_mean_[c] = T((1.0 - m) * Accum<T>(running_mean_[c]) + m * mean);
        running_var_[c] = T((1.0 - m) * Accum<T>(running_var_[c]) + m * var);
      } else {
        mean = Accum<T>(running_mean_[c]);
        var = Accum<T>(running_var_[c]);
      }
      inv_std[c] = 1.0 / std::sqrt(var + options_.epsilon);
      const Accum<T> g = Accum<T>(gamma_.value[c]), be = Accum<T>(beta_.value[c]);
      for (std::size_t b = 0; b < B; ++b) {
        const std::size_t base = (b * C + c) * inner;
        for (std::size_t i = 0; i < inner; ++i) {
          const Accum<T> xhat = (Accum<T>(x[base + i]) - mean) * inv_std[c];
          if (mode == Mode::train) normalized_[base + i] = T(xhat);
          out[base + i] = T(xhat * g + be);
        }
      }
    });
    if (mode == Mode::train) inv_std_ = std::move(inv_std);
    last_mode_ = mode;
    return out;
  }

  /// Gradient through batch statistics; only valid after a train-mode forward.
  Tensor<T> backward(const Tensor<T>& grad_out) {
    tstcnn::detail::require(last_mode_ == Mode::train && !normalized_.empty(),
                            "batchnorm backward requires a train-mode forward (eval-mode "
                            "backward through running statistics is not supported)");
    tstcnn::detail::require_shape(grad_out.shape() == normalized_.shape(),
                                  "batchnorm grad_out shape mismatch");
    const std::size_t B = grad_out.dim(0), C = channels(), inner = grad_out.numel() / (B * C);
    const Accum<T> count = Accum<T>(B * inner);
    Tensor<T> grad_in(grad_out.shape());
    if (gamma_.grad.empty()) gamma_.grad = Tensor<T>(gamma_.value.shape());
    if (beta_.grad.empty()) beta_.grad = Tensor<T>(beta_.value.shape());
    parallel_for(C, [&](std::size_t c) {
      Accum<T> sum_dy = 0.0, sum_dy_xhat = 0.0;
      for (std::size_t b = 0; b < B; ++b) {
        const std::size_t base = (b * C + c) * inner;
        for (std::size_t i = 0; i < inner; ++i) {
          sum_dy += Accum<T>(grad_out[base + i]);
          sum_dy_xhat += Accum<T>(grad_out[base + i]) * Accum<T>(normalized_[base + i]);
        }
      }
      gamma_.grad[c] += T(sum_dy_xhat);
      beta_.grad[c] += T(sum_dy);
      const Accum<T> k = Accum<T>(gamma_.value[c]) * inv_std_[c] / count;
      for (std::size_t b = 0; b < B; ++b) {
        const std::size_t base = (b * C + c) * inner;
        for (std::size_t i = 0; i < inner; ++i)
          grad_in[base + i] = T(k * (count * Accum<T>(grad_out[base + i]) - sum_dy -
                                     Accum<T>(normalized_[base + i]) * sum_dy_xhat));
      }
    });
    return grad_in;
  }

  void register_parameters(ParameterSet<T>& set, const std::string& prefix) {
    set.add(join(prefix, "gamma"), gamma_);
    set.add(join(prefix, "beta"), beta_);
    set.add_buffer(join(prefix, "running_mean"), running_mean_);
    set.add_buffer(join(prefix, "running_var"), running_var_);
  }

  Parameter<T>& gamma() { return gamma_; }
  Parameter<T>& beta() { return beta_; }
  const Tensor<T>& running_mean() const { return running_mean_; }
  const Tensor<T>& running_var() const { return running_var_; }
  const BatchNormOptions& options() const { return options_; }

 private:
  BatchNormOptions options_;
  Parameter<T> gamma_;
  Parameter<T> beta_;
  Tensor<T> running_mean_;
  Tensor<T> running_var_;
  Tensor<T> normalized_;
  std::vector<Accum<T>> inv_std_;
  Mode last_mode_ = Mode::eval;
};

}  // namespace tstcnn::nn
