#pragma once

#include <algorithm>
#include <string>

#include "tstcnn/core/ops.hpp"
#include "tstcnn/nn/activation.hpp"
#include "tstcnn/nn/batchnorm3d.hpp"
#include "tstcnn/nn/conv3d.hpp"

namespace tstcnn::blocks {

using nn::Mode;

/// conv(ReLU(BatchNorm(x))): the pre-activation unit shared by residual blocks and
/// the mask-branch head.
template <typename T>
class PreActConv {
 public:
  PreActConv() = default;
  PreActConv(std::size_t in_channels, std::size_t out_channels, std::size_t kernel)
      : bn_(in_channels),
        conv_(in_channels, out_channels,
              nn::Conv3dGeometry{{kernel, kernel, kernel}, {1, 1, 1},
                                 {kernel / 2, kernel / 2, kernel / 2}}) {}

  void init(Rng& rng) { conv_.init(rng); }

  Tensor<T> forward(const Tensor<T>& x, Mode mode) {
    return conv_.forward(relu_.forward(bn_.forward(x, mode), mode), mode);
  }

  Tensor<T> backward(const Tensor<T>& grad_out) {
    return bn_.backward(relu_.backward(conv_.backward(grad_out)));
  }

  void register_parameters(nn::ParameterSet<T>& set, const std::string& prefix,
                           const std::string& bn_name, const std::string& conv_name) {
    bn_.register_parameters(set, nn::join(prefix, bn_name));
    conv_.register_parameters(set, nn::join(prefix, conv_name));
  }

  nn::BatchNorm3d<T>& bn() { return bn_; }
  nn::Conv3d<T>& conv() { return conv_; }

 private:
  nn::BatchNorm3d<T> bn_;
  nn::Activation<T> relu_{nn::ActivationKind::relu};
  nn::Conv3d<T> conv_;
};

inline std::size_t bottleneck_channels(std::size_t channels) { return std::max<std::size_t>(1, channels / 4); }

/// res(x) = f3(f2(f1(x))) + x with f1: N -> N/4 (1x1x1), f2: N/4 -> N/4 (3x3x3),
/// f3: N/4 -> N (1x1x1). The bottleneck width is floor(N/4), at least 1.
template <typename T>
class ResidualBlock3d {
 public:
  ResidualBlock3d() = default;
  explicit ResidualBlock3d(std::size_t channels)
      : channels_(channels),
        f1_(channels, bottleneck_channels(channels), 1),
        f2_(bottleneck_channels(channels), bottleneck_channels(channels), 3),
        f3_(bottleneck_channels(channels), channels, 1) {
    tstcnn::detail::require(channels >= 1, "residual block needs at least one channel");
  }

  void init(Rng& rng) {
    f1_.init(rng);
    f2_.init(rng);
    f3_.init(rng);
  }

  std::size_t channels() const { return channels_; }

  Tensor<T> forward(const Tensor<T>& x, Mode mode) {
    nn::require_rank5(x.shape(), "residual block");
    tstcnn::detail::require_shape(x.dim(1) == channels_,
                                  "residual block expects " + std::to_string(channels_) +
                                      " channels, got " + x.shape().str());
    Tensor<T> path = f3_.forward(f2_.forward(f1_.forward(x, mode), mode), mode);
    return add(path, x);
  }

  Tensor<T> backward(const Tensor<T>& grad_out) {
    Tensor<T> g = f1_.backward(f2_.backward(f3_.backward(grad_out)));
    accumulate(g, grad_out);
    return g;
  }

  void register_parameters(nn::ParameterSet<T>& set, const std::string& prefix) {
    f1_.register_parameters(set, prefix, "bn1", "conv1");
    f2_.register_parameters(set, prefix, "bn2", "conv2");
    f3_.register_parameters(set, prefix, "bn3", "conv3");
  }

  PreActConv<T>& stage(int i) { return i == 0 ? f1_ : i == 1 ? f2_ : f3_; }

 private:
  std::size_t channels_ = 0;
  PreActConv<T> f1_, f2_, f3_;
};

}  // namespace tstcnn::blocks
