#pragma once

#include <string>
#include <vector>

#include "tstcnn/core/ops.hpp"
#include "tstcnn/nn/module.hpp"

namespace tstcnn::nn {

struct Conv3dGeometry {
  Index3 kernel{3, 3, 3};
  Index3 stride{1, 1, 1};
  Index3 padding{0, 0, 0};
};

inline std::size_t conv_output_extent(std::size_t in, std::size_t kernel, std::size_t stride,
                                      std::size_t pad) {
  detail::require_shape(kernel >= 1 && stride >= 1, "conv kernel and stride must be >= 1");
  detail::require_shape(in + 2 * pad >= kernel, "conv3d output extent would be < 1 (input " +
                                                    std::to_string(in) + ", kernel " +
                                                    std::to_string(kernel) + ", pad " +
                                                    std::to_string(pad) + ")");
  return (in + 2 * pad - kernel) / stride + 1;
}

template <typename T>
struct Conv3dGrads {
  Tensor<T> grad_input;
  Tensor<T> grad_weight;
  Tensor<T> grad_bias;
};

namespace detail {

struct AxisRange {
  long lo = 0;
  long hi = -1;  // inclusive
  long count() const { return hi >= lo ? hi - lo + 1 : 0; }
};

// Output positions o with o*stride + k - pad inside [0, in).
inline AxisRange valid_outputs(long in, long out, long k, long stride, long pad) {
  AxisRange r;
  const long shift = k - pad;
  r.lo = shift >= 0 ? 0 : (-shift + stride - 1) / stride;
  r.hi = std::min(out - 1, (in - 1 - shift) >= 0 ? (in - 1 - shift) / stride : -1);
  return r;
}

}  // namespace detail

/// Cross-correlation with zero padding: out[b,o] = bias[o] + sum_i weight[o,i] * input[b,i].
template <typename T>
Tensor<T> conv3d_forward(const Tensor<T>& weight, const Tensor<T>& bias,
                         const Conv3dGeometry& g, const Tensor<T>& input) {
  require_rank5(input.shape(), "conv3d");
  const long B = long(input.dim(0)), Ci = long(input.dim(1));
  const long D = long(input.dim(2)), H = long(input.dim(3)), W = long(input.dim(4));
  const long Co = long(weight.dim(0));
  tstcnn::detail::require_shape(long(weight.dim(1)) == Ci,
                                "conv3d channel mismatch: layer expects " +
                                    std::to_string(weight.dim(1)) + ", input has " +
                                    std::to_string(Ci));
  const long KD = long(g.kernel[0]), KH = long(g.kernel[1]), KW = long(g.kernel[2]);
  const long SD = long(g.stride[0]), SH = long(g.stride[1]), SW = long(g.stride[2]);
  const long PD = long(g.padding[0]), PH = long(g.padding[1]), PW = long(g.padding[2]);
  const long OD = long(conv_output_extent(D, KD, SD, PD));
  const long OH = long(conv_output_extent(H, KH, SH, PH));
  const long OW = long(conv_output_extent(W, KW, SW, PW));
  Tensor<T> out(Shape{std::size_t(B), std::size_t(Co), std::size_t(OD), std::size_t(OH),
                      std::size_t(OW)});
  const long in_plane = D * H * W, out_plane = OD * OH * OW, ksize = KD * KH * KW;

  parallel_for(std::size_t(B * Co), [&](std::size_t job) {
    const long b = long(job) / Co, co = long(job) % Co;
    T* o = out.data() + (b * Co + co) * out_plane;
    std::fill(o, o + out_plane, bias[co]);
    for (long ci = 0; ci < Ci; ++ci) {
      const T* x = input.data() + (b * Ci + ci) * in_plane;
      const T* w = weight.data() + (co * Ci + ci) * ksize;
      for (long kd = 0; kd < KD; ++kd) {
        const auto rd = detail::valid_outputs(D, OD, kd, SD, PD);
        for (long od = rd.lo; od <= rd.hi; ++od) {
          const long id = od * SD + kd - PD;
          for (long kh = 0; kh < KH; ++kh) {
            const auto rh = detail::valid_outputs(H, OH, kh, SH, PH);
            for (long oh = rh.lo; oh <= rh.hi; ++oh) {
              const long ih = oh * SH + kh - PH;
              const T* xrow = x + (id * H + ih) * W;
              T* orow = o + (od * OH + oh) * OW;
              for (long kw = 0; kw < KW; ++kw) {
                const T wv = w[(kd * KH + kh) * KW + kw];
                const auto rw = detail::valid_outputs(W, OW, kw, SW, PW);
                if (SW == 1) {
                  tstcnn::detail::axpy(wv, xrow + rw.lo + kw - PW, orow + rw.lo,
                                       std::size_t(rw.count()));
                } else {
                  for (long ow = rw.lo; ow <= rw.hi; ++ow) orow[ow] += wv * xrow[ow * SW + kw - PW];
                }
              }
            }
          }
        }
      }
    }
  });
  return out;
}

/// Exact gradients of conv3d_forward. grad_input is skipped when `need_input_grad` is false.
template <typename T>
Conv3dGrads<T> conv3d_backward(const Tensor<T>& weight, const Conv3dGeometry& g,
                               const Tensor<T>& input, const Tensor<T>& grad_out,
                               bool need_input_grad = true) {
  require_rank5(input.shape(), "conv3d");
  const long B = long(input.dim(0)), Ci = long(input.dim(1));
  const long D = long(input.dim(2)), H = long(input.dim(3)), W = long(input.dim(4));
  const long Co = long(weight.dim(0));
  const long KD = long(g.kernel[0]), KH = long(g.kernel[1]), KW = long(g.kernel[2]);
  const long SD = long(g.stride[0]), SH = long(g.stride[1]), SW = long(g.stride[2]);
  const long PD = long(g.padding[0]), PH = long(g.padding[1]), PW = long(g.padding[2]);
  const long OD = long(conv_output_extent(D, KD, SD, PD));
  const long OH = long(conv_output_extent(H, KH, SH, PH));
  const long OW = long(conv_output_extent(W, KW, SW, PW));
  tstcnn::detail::require_shape(
      grad_out.shape() == Shape{std::size_t(B), std::size_t(Co), std::size_t(OD), std::size_t(OH),
                                std::size_t(OW)},
      "conv3d grad_out shape " + grad_out.shape().str() + " inconsistent with forward");
  tstcnn::detail::require_shape(long(weight.dim(1)) == Ci, "conv3d channel mismatch");
  const long in_plane = D * H * W, out_plane = OD * OH * OW, ksize = KD * KH * KW;

  Conv3dGrads<T> grads;
  grads.grad_weight = Tensor<T>(weight.shape());
  grads.grad_bias = Tensor<T>(Shape{std::size_t(Co)});

  parallel_for(std::size_t(Co), [&](std::size_t job) {
    const long co = long(job);
    std::vector<Accum<T>> acc(std::size_t(Ci * ksize), 0.0);
    Accum<T> bias_acc = 0.0;
    for (long b = 0; b < B; ++b) {
      const T* go = grad_out.data() + (b * Co + co) * out_plane;
      bias_acc += tstcnn::detail::sum(go, std::size_t(out_plane));
      for (long ci = 0; ci < Ci; ++ci) {
        const T* x = input.data() + (b * Ci + ci) * in_plane;
        Accum<T>* a = acc.data() + ci * ksize;
        for (long kd = 0; kd < KD; ++kd) {
          const auto rd = detail::valid_outputs(D, OD, kd, SD, PD);
          for (long od = rd.lo; od <= rd.hi; ++od) {
            const long id = od * SD + kd - PD;
            for (long kh = 0; kh < KH; ++kh) {
              const auto rh = detail::valid_outputs(H, OH, kh, SH, PH);
              for (long oh = rh.lo; oh <= rh.hi; ++oh) {
                const long ih = oh * SH + kh - PH;
                const T* xrow = x + (id * H + ih) * W;
                const T* grow = go + (od * OH + oh) * OW;
                for (long kw = 0; kw < KW; ++kw) {
                  const auto rw = detail::valid_outputs(W, OW, kw, SW, PW);
                  Accum<T> s = 0.0;
                  if (SW == 1) {
                    s = tstcnn::detail::dot(grow + rw.lo, xrow + rw.lo + kw - PW,
                                            std::size_t(rw.count()));
                  } else {
                    for (long ow = rw.lo; ow <= rw.hi; ++ow)
                      s += Accum<T>(grow[ow]) * Accum<T>(xrow[ow * SW + kw - PW]);
                  }
                  a[(kd * KH + kh) * KW + kw] += s;
                }
              }
            }
          }
        }
      }
    }
    T* gw = grads.grad_weight.data() + co * Ci * ksize;
    for (long i = 0; i < Ci * ksize; ++i) gw[i] = static_cast<T>(acc[std::size_t(i)]);
    grads.grad_bias[std::size_t(co)] = static_cast<T>(bias_acc);
  });

  if (!need_input_grad) return grads;
  grads.grad_input = Tensor<T>(input.shape());
  parallel_for(std::size_t(B * Ci), [&](std::size_t job) {
    const long b = long(job) / Ci, ci = long(job) % Ci;
    T* gx = grads.grad_input.data() + (b * Ci + ci) * in_plane;
    for (long co = 0; co < Co; ++co) {
      const T* go = grad_out.data() + (b * Co + co) * out_plane;
      const T* w = weight.data() + (co * Ci + ci) * ksize;
      for (long kd = 0; kd < KD; ++kd) {
        const auto rd = detail::valid_outputs(D, OD, kd, SD, PD);
        for (long od = rd.lo; od <= rd.hi; ++od) {
          const long id = od * SD + kd - PD;
          for (long kh = 0; kh < KH; ++kh) {
            const auto rh = detail::valid_outputs(H, OH, kh, SH, PH);
            for (long oh = rh.lo; oh <= rh.hi; ++oh) {
              const long ih = oh * SH + kh - PH;
              T* xrow = gx + (id * H + ih) * W;
              const T* grow = go + (od * OH + oh) * OW;
              for (long kw = 0; kw < KW; ++kw) {
                const T wv = w[(kd * KH + kh) * KW + kw];
                const auto rw = detail::valid_outputs(W, OW, kw, SW, PW);
                if (SW == 1) {
                  tstcnn::detail::axpy(wv, grow + rw.lo, xrow + rw.lo + kw - PW,
                                       std::size_t(rw.count()));
                } else {
                  for (long ow = rw.lo; ow <= rw.hi; ++ow) xrow[ow * SW + kw - PW] += wv * grow[ow];
                }
              }
            }
          }
        }
      }
    }
  });
  return grads;
}

/// Learnable 3D convolution. forward() in train mode caches its input for backward().
template <typename T>
class Conv3d {
 public:
  Conv3d() = default;
  Conv3d(std::size_t in_channels, std::size_t out_channels, Conv3dGeometry geometry = {})
      : geometry_(geometry),
        weight_(Shape{out_channels, in_channels, geometry.kernel[0], geometry.kernel[1],
                      geometry.kernel[2]}),
        bias_(Shape{out_channels}) {}

  void init(Rng& rng) {
    const std::size_t fan_in = weight_.value.numel() / weight_.value.dim(0);
    init_uniform_fan_in(weight_.value, fan_in, rng);
    init_uniform_fan_in(bias_.value, fan_in, rng);
  }

  Tensor<T> forward(const Tensor<T>& x, Mode mode) {
    if (mode == Mode::train) input_ = x;
    return conv3d_forward(weight_.value, bias_.value, geometry_, x);
  }

  Tensor<T> backward(const Tensor<T>& grad_out, bool need_input_grad = true) {
    tstcnn::detail::require(!input_.empty(), "conv3d backward called before a train-mode forward");
    auto g = conv3d_backward(weight_.value, geometry_, input_, grad_out, need_input_grad);
    accumulate(weight_.grad, g.grad_weight);
    accumulate(bias_.grad, g.grad_bias);
    return std::move(g.grad_input);
  }

  void register_parameters(ParameterSet<T>& set, const std::string& prefix) {
    set.add(join(prefix, "weight"), weight_);
    set.add(join(prefix, "bias"), bias_);
  }

  Parameter<T>& weight() { return weight_; }
  Parameter<T>& bias() { return bias_; }
  const Conv3dGeometry& geometry() const { return geometry_; }
  std::size_t in_channels() const { return weight_.value.dim(1); }
  std::size_t out_channels() const { return weight_.value.dim(0); }

 private:
  Conv3dGeometry geometry_;
  Parameter<T> weight_;
  Parameter<T> bias_;
  Tensor<T> input_;
};

}  // namespace tstcnn::nn
