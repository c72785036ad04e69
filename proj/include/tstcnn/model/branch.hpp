#pragma once

#include <array>
#include <memory>
#include <string>

#include "tstcnn/blocks/attention.hpp"
#include "tstcnn/model/config.hpp"
#include "tstcnn/nn/linear.hpp"

namespace tstcnn::model {

using nn::Mode;

/// Single STCNN stream: three (conv 3x3x3 stride 1 pad 1, ReLU, max-pool 2x2x2)
/// stages, an optional attention block after each pool, then a fully connected layer.
template <typename T>
class StcnnBranch {
 public:
  StcnnBranch(const ModelConfig& config, std::size_t in_channels)
      : in_channels_(in_channels), window_{config.window_frames, config.height, config.width} {
    std::size_t c = in_channels;
    const auto with_attention = config.attention_stages();
    for (int s = 0; s < 3; ++s) {
      convs_[s] = nn::Conv3d<T>(c, config.filters[s],
                                nn::Conv3dGeometry{{3, 3, 3}, {1, 1, 1}, {1, 1, 1}});
      c = config.filters[s];
      if (with_attention[s]) attention_[s] = std::make_unique<blocks::AttentionBlock3d<T>>(c);
    }
    fc_ = nn::Linear<T>(config.flatten_length(), config.fc_size);
  }

  void init(Rng& rng) {
    for (int s = 0; s < 3; ++s) {
      convs_[s].init(rng);
      if (attention_[s]) attention_[s]->init(rng);
    }
    fc_.init(rng);
  }

  Tensor<T> forward(const Tensor<T>& x, Mode mode) {
    nn::require_rank5(x.shape(), "branch");
    tstcnn::detail::require_shape(x.dim(1) == in_channels_,
                                  "branch expects " + std::to_string(in_channels_) +
                                      " input channels, got " + x.shape().str());
    tstcnn::detail::require_shape(x.dim(2) == window_[0] && x.dim(3) == window_[1] &&
                                      x.dim(4) == window_[2],
                                  "branch expects window (T, H, W) = (" +
                                      std::to_string(window_[0]) + ", " +
                                      std::to_string(window_[1]) + ", " +
                                      std::to_string(window_[2]) + "), got " + x.shape().str());
    Tensor<T> h = x;
    for (int s = 0; s < 3; ++s) {
      for (int a = 0; a < 3; ++a)
        tstcnn::detail::require_shape(h.dim(2 + a) >= 2, "extent too small for pooling at stage " +
                                                             std::to_string(s + 1) + ": " +
                                                             h.shape().str());
      h = pools_[s].forward(relus_[s].forward(convs_[s].forward(h, mode), mode), mode);
      if (attention_[s]) h = attention_[s]->forward(h, mode);
    }
    flat_shape_ = h.shape();
    return fc_.forward(h.reshaped(Shape{h.dim(0), h.numel() / h.dim(0)}), mode);
  }

  Tensor<T> backward(const Tensor<T>& grad_out, bool need_input_grad = false) {
    Tensor<T> g = fc_.backward(grad_out).reshaped(flat_shape_);
    for (int s = 2; s >= 0; --s) {
      if (attention_[s]) g = attention_[s]->backward(g);
      g = convs_[s].backward(relus_[s].backward(pools_[s].backward(g)), s > 0 || need_input_grad);
    }
    return g;
  }

  void register_parameters(nn::ParameterSet<T>& set, const std::string& prefix) {
    for (int s = 0; s < 3; ++s) {
      convs_[s].register_parameters(set, nn::join(prefix, "conv" + std::to_string(s + 1)));
      if (attention_[s])
        attention_[s]->register_parameters(set, nn::join(prefix, "attn" + std::to_string(s + 1)));
    }
    fc_.register_parameters(set, nn::join(prefix, "fc"));
  }

  /// Null when the stage has no attention block.
  blocks::AttentionBlock3d<T>* attention(int stage) { return attention_[stage].get(); }
  nn::Conv3d<T>& conv(int stage) { return convs_[stage]; }
  nn::Linear<T>& fc() { return fc_; }
  const Shape& last_flat_shape() const { return flat_shape_; }

 private:
  std::size_t in_channels_;
  Extents window_;
  std::array<nn::Conv3d<T>, 3> convs_;
  std::array<nn::Activation<T>, 3> relus_;
  std::array<nn::MaxPool3d<T>, 3> pools_;
  std::array<std::unique_ptr<blocks::AttentionBlock3d<T>>, 3> attention_;
  nn::Linear<T> fc_;
  Shape flat_shape_;
};

}  // namespace tstcnn::model
