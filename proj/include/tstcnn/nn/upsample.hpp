#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "tstcnn/nn/module.hpp"

namespace tstcnn::nn {

namespace detail {

struct LerpTap {
  std::size_t lo;
  std::size_t hi;
  double w;  // weight of `hi`
};

// Corner-aligned taps: target endpoints coincide with source endpoints;
// a source extent of 1 broadcasts.
inline std::vector<LerpTap> lerp_taps(std::size_t source, std::size_t target) {
  std::vector<LerpTap> taps(target);
  for (std::size_t j = 0; j < target; ++j) {
    if (source == 1 || target == 1) {
      taps[j] = {0, 0, 0.0};
      continue;
    }
    const double num = double(j) * double(source - 1);
    const std::size_t lo = std::size_t(j * (source - 1) / (target - 1));
    const double w = num / double(target - 1) - double(lo);
    taps[j] = {lo, std::min(lo + 1, source - 1), w};
  }
  return taps;
}

template <typename T>
Tensor<T> lerp_axis(const Tensor<T>& x, std::size_t axis, std::size_t target) {
  std::vector<std::size_t> dims = x.shape().dims();
  const std::size_t source = dims[axis];
  std::size_t outer = 1, inner = 1;
  for (std::size_t a = 0; a < axis; ++a) outer *= dims[a];
  for (std::size_t a = axis + 1; a < dims.size(); ++a) inner *= dims[a];
  dims[axis] = target;
  Tensor<T> y{Shape(dims)};
  const auto taps = lerp_taps(source, target);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t j = 0; j < target; ++j) {
      const T* a = x.data() + (o * source + taps[j].lo) * inner;
      const T* b = x.data() + (o * source + taps[j].hi) * inner;
      T* out = y.data() + (o * target + j) * inner;
      const double w = taps[j].w;
      for (std::size_t i = 0; i < inner; ++i)
        out[i] = w == 0.0 ? a[i] : T((1.0 - w) * Accum<T>(a[i]) + w * Accum<T>(b[i]));
    }
  return y;
}

template <typename T>
Tensor<T> lerp_axis_adjoint(const Tensor<T>& g, std::size_t axis, std::size_t source) {
  std::vector<std::size_t> dims = g.shape().dims();
  const std::size_t target = dims[axis];
  std::size_t outer = 1, inner = 1;
  for (std::size_t a = 0; a < axis; ++a) outer *= dims[a];
  for (std::size_t a = axis + 1; a < dims.size(); ++a) inner *= dims[a];
  dims[axis] = source;
  Tensor<T> gx{Shape(dims)};
  const auto taps = lerp_taps(source, target);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t j = 0; j < target; ++j) {
      T* a = gx.data() + (o * source + taps[j].lo) * inner;
      T* b = gx.data() + (o * source + taps[j].hi) * inner;
      const T* gj = g.data() + (o * target + j) * inner;
      const T wa = T(1.0 - taps[j].w), wb = T(taps[j].w);
      for (std::size_t i = 0; i < inner; ++i) {
        a[i] += wa * gj[i];
        b[i] += wb * gj[i];
      }
    }
  return gx;
}

}  // namespace detail

/// Separable trilinear interpolation of (B, C, d, h, w) to (B, C, D, H, W).
template <typename T>
Tensor<T> trilinear_upsample(const Tensor<T>& input, const Index3& target) {
  require_rank5(input.shape(), "trilinear_upsample");
  for (int a = 0; a < 3; ++a)
    tstcnn::detail::require_shape(target[a] >= input.dim(2 + a),
                                  "trilinear target extent smaller than source " +
                                      input.shape().str());
  Tensor<T> y = input;
  for (int a = 2; a >= 0; --a)
    if (target[a] != y.dim(2 + a)) y = detail::lerp_axis(y, 2 + a, target[a]);
  return y;
}

template <typename T>
Tensor<T> trilinear_upsample_backward(const Shape& input_shape, const Tensor<T>& grad_out) {
  Tensor<T> g = grad_out;
  for (int a = 0; a < 3; ++a)
    if (g.dim(2 + a) != input_shape[2 + a]) g = detail::lerp_axis_adjoint(g, 2 + a, input_shape[2 + a]);
  return g;
}

}  // namespace tstcnn::nn
