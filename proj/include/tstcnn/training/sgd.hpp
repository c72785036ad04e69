#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "tstcnn/core/error.hpp"
#include "tstcnn/nn/module.hpp"

namespace tstcnn::training {

struct SgdConfig {
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::size_t batch_size = 8;
  std::size_t max_epochs = 50;
  std::uint64_t seed = 0;

  void validate() const {
    // lr = 0 is accepted: it is the frozen-parameter sanity run.
    tstcnn::detail::require(std::isfinite(learning_rate) && learning_rate >= 0.0, "learning rate must be >= 0");
    tstcnn::detail::require(momentum >= 0.0 && momentum < 1.0, "momentum must lie in [0, 1)");
    tstcnn::detail::require(batch_size >= 1, "batch size must be >= 1");
    tstcnn::detail::require(max_epochs >= 1, "epochs must be >= 1");
  }
};

/// Classical momentum: v <- m v - lr g; p <- p + v. Velocities follow parameter order.
template <typename T>
class Sgd {
 public:
  explicit Sgd(SgdConfig config) : config_(config) { config_.validate(); }

  const SgdConfig& config() const { return config_; }
  const std::vector<Tensor<T>>& velocities() const { return velocity_; }

  /// Throws NumericError without touching any parameter if a gradient is not finite.
  void step(nn::ParameterSet<T>& set) {
    if (velocity_.empty())
      for (auto& p : set.params) velocity_.emplace_back(p.param->value.shape());
    tstcnn::detail::require_shape(velocity_.size() == set.params.size(), "parameter set changed between steps");
    for (auto& p : set.params)
      for (std::size_t i = 0; i < p.param->grad.numel(); ++i)
        if (!std::isfinite(double(p.param->grad[i])))
          throw NumericError("non-finite gradient in " + p.name + " at element " + std::to_string(i));
    const T lr = T(config_.learning_rate), m = T(config_.momentum);
    for (std::size_t k = 0; k < set.params.size(); ++k) {
      auto& p = *set.params[k].param;
      auto& v = velocity_[k];
      tstcnn::detail::require_shape(v.shape() == p.value.shape(), "velocity shape mismatch for " + set.params[k].name);
      for (std::size_t i = 0; i < v.numel(); ++i) {
        v[i] = m * v[i] - lr * p.grad[i];
        p.value[i] += v[i];
      }
    }
  }

 private:
  SgdConfig config_;
  std::vector<Tensor<T>> velocity_;
};

}  // namespace tstcnn::training
