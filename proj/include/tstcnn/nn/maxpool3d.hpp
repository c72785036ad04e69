#pragma once

#include <string>
#include <vector>

#include "tstcnn/core/parallel.hpp"
#include "tstcnn/core/kink_probe.hpp"
#include "tstcnn/nn/module.hpp"

namespace tstcnn::nn {

template <typename T>
struct PoolResult {
  Tensor<T> output;
  std::vector<std::size_t> argmax;  // flat input index per output element
};

/// Non-overlapping max pooling (stride = kernel). Trailing elements past
/// floor(in/k)*k are dropped; ties resolve to the lowest flat input index.
template <typename T>
PoolResult<T> maxpool3d_forward(const Tensor<T>& input, Index3 kernel = {2, 2, 2}) {
  require_rank5(input.shape(), "maxpool3d");
  const std::size_t B = input.dim(0), C = input.dim(1);
  const std::size_t D = input.dim(2), H = input.dim(3), W = input.dim(4);
  const std::size_t kd = kernel[0], kh = kernel[1], kw = kernel[2];
  for (int a = 0; a < 3; ++a) {
    const std::size_t extent = input.dim(2 + a);
    tstcnn::detail::require_shape(kernel[a] >= 1 && extent >= kernel[a],
                                  "maxpool3d extent " + std::to_string(extent) +
                                      " smaller than kernel " + std::to_string(kernel[a]));
  }
  const std::size_t OD = D / kd, OH = H / kh, OW = W / kw;
  PoolResult<T> r;
  r.output = Tensor<T>(Shape{B, C, OD, OH, OW});
  r.argmax.resize(r.output.numel());
  parallel_for(B * C, [&](std::size_t plane) {
    const std::size_t in_base = plane * D * H * W;
    const std::size_t out_base = plane * OD * OH * OW;
    for (std::size_t od = 0; od < OD; ++od)
      for (std::size_t oh = 0; oh < OH; ++oh)
        for (std::size_t ow = 0; ow < OW; ++ow) {
          std::size_t best = in_base + ((od * kd) * H + oh * kh) * W + ow * kw;
          T best_value = input[best];
          for (std::size_t a = 0; a < kd; ++a)
            for (std::size_t b = 0; b < kh; ++b)
              for (std::size_t c = 0; c < kw; ++c) {
                const std::size_t idx =
                    in_base + ((od * kd + a) * H + oh * kh + b) * W + ow * kw + c;
                if (input[idx] > best_value) {
                  best_value = input[idx];
                  best = idx;
                }
              }
          const std::size_t o = out_base + (od * OH + oh) * OW + ow;
          r.output[o] = best_value;
          r.argmax[o] = best;
        }
  });
  probe_indices(r.argmax);
  return r;
}

template <typename T>
Tensor<T> maxpool3d_backward(const Shape& input_shape, const std::vector<std::size_t>& argmax,
                             const Tensor<T>& grad_out) {
  tstcnn::detail::require_shape(argmax.size() == grad_out.numel(),
                                "maxpool3d grad_out does not match recorded argmax");
  Tensor<T> grad_in(input_shape);
  for (std::size_t i = 0; i < argmax.size(); ++i) grad_in[argmax[i]] += grad_out[i];
  return grad_in;
}

template <typename T>
class MaxPool3d {
 public:
  explicit MaxPool3d(Index3 kernel = {2, 2, 2}) : kernel_(kernel) {}

  Tensor<T> forward(const Tensor<T>& x, Mode mode) {
    auto r = maxpool3d_forward(x, kernel_);
    if (mode == Mode::train) {
      input_shape_ = x.shape();
      argmax_ = std::move(r.argmax);
      has_forward_ = true;
    }
    return std::move(r.output);
  }

  Tensor<T> backward(const Tensor<T>& grad_out) const {
    tstcnn::detail::require(has_forward_, "maxpool3d backward called before forward");
    return maxpool3d_backward(input_shape_, argmax_, grad_out);
  }

  static Shape output_shape(const Shape& in, Index3 kernel = {2, 2, 2}) {
    return Shape{in[0], in[1], in[2] / kernel[0], in[3] / kernel[1], in[4] / kernel[2]};
  }

 private:
  Index3 kernel_;
  Shape input_shape_;
  std::vector<std::size_t> argmax_;
  bool has_forward_ = false;
};

}  // namespace tstcnn::nn
