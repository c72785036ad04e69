#pragma once

// Straight-line reference implementations used only by tests. They share no code
// with the library kernels they check.

#include <cmath>
#include <vector>

#include "tstcnn/core/tensor.hpp"

namespace oracle {

using tstcnn::Shape;
using tstcnn::Tensor;

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor<T> c(Shape{m, n});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      long double s = 0;
      for (std::size_t p = 0; p < k; ++p) s += (long double)a.at({i, p}) * b.at({p, j});
      c.at({i, j}) = T(s);
    }
  return c;
}

// Zero-padded cross-correlation, one output element at a time.
template <typename T>
Tensor<T> conv3d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias, long stride,
                 long pad) {
  const long B = x.dim(0), Ci = x.dim(1), D = x.dim(2), H = x.dim(3), W = x.dim(4);
  const long Co = w.dim(0), KD = w.dim(2), KH = w.dim(3), KW = w.dim(4);
  const long OD = (D + 2 * pad - KD) / stride + 1, OH = (H + 2 * pad - KH) / stride + 1,
             OW = (W + 2 * pad - KW) / stride + 1;
  Tensor<T> y(Shape{std::size_t(B), std::size_t(Co), std::size_t(OD), std::size_t(OH), std::size_t(OW)});
  for (long b = 0; b < B; ++b)
    for (long co = 0; co < Co; ++co)
      for (long od = 0; od < OD; ++od)
        for (long oh = 0; oh < OH; ++oh)
          for (long ow = 0; ow < OW; ++ow) {
            long double s = bias[co];
            for (long ci = 0; ci < Ci; ++ci)
              for (long kd = 0; kd < KD; ++kd)
                for (long kh = 0; kh < KH; ++kh)
                  for (long kw = 0; kw < KW; ++kw) {
                    const long id = od * stride + kd - pad, ih = oh * stride + kh - pad,
                               iw = ow * stride + kw - pad;
                    if (id < 0 || ih < 0 || iw < 0 || id >= D || ih >= H || iw >= W) continue;
                    s += (long double)w.at({size_t(co), size_t(ci), size_t(kd), size_t(kh), size_t(kw)}) *
                         x.at({size_t(b), size_t(ci), size_t(id), size_t(ih), size_t(iw)});
                  }
            y.at({size_t(b), size_t(co), size_t(od), size_t(oh), size_t(ow)}) = T(s);
          }
  return y;
}

template <typename T>
Tensor<T> maxpool2(const Tensor<T>& x) {
  const std::size_t B = x.dim(0), C = x.dim(1);
  const std::size_t OD = x.dim(2) / 2, OH = x.dim(3) / 2, OW = x.dim(4) / 2;
  Tensor<T> y(Shape{B, C, OD, OH, OW});
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t d = 0; d < OD; ++d)
        for (std::size_t h = 0; h < OH; ++h)
          for (std::size_t w = 0; w < OW; ++w) {
            T m = x.at({b, c, 2 * d, 2 * h, 2 * w});
            for (std::size_t i = 0; i < 2; ++i)
              for (std::size_t j = 0; j < 2; ++j)
                for (std::size_t k = 0; k < 2; ++k)
                  m = std::max(m, x.at({b, c, 2 * d + i, 2 * h + j, 2 * w + k}));
            y.at({b, c, d, h, w}) = m;
          }
  return y;
}

// Batch-norm from per-channel direct statistics (two-pass, long double).
template <typename T>
Tensor<T> batchnorm(const Tensor<T>& x, const std::vector<double>& gamma,
                    const std::vector<double>& beta, double eps) {
  const std::size_t B = x.dim(0), C = x.dim(1), inner = x.numel() / (B * C);
  Tensor<T> y(x.shape());
  for (std::size_t c = 0; c < C; ++c) {
    long double mean = 0, var = 0;
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t i = 0; i < inner; ++i) mean += x[(b * C + c) * inner + i];
    mean /= (long double)(B * inner);
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t i = 0; i < inner; ++i) {
        long double d = x[(b * C + c) * inner + i] - mean;
        var += d * d;
      }
    var /= (long double)(B * inner);
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t i = 0; i < inner; ++i) {
        const std::size_t k = (b * C + c) * inner + i;
        y[k] = T((x[k] - mean) / std::sqrt(var + eps) * gamma[c] + beta[c]);
      }
  }
  return y;
}

// Eight-corner trilinear formula with corner-aligned coordinates.
template <typename T>
Tensor<T> trilinear(const Tensor<T>& x, std::size_t D, std::size_t H, std::size_t W) {
  const std::size_t B = x.dim(0), C = x.dim(1), d = x.dim(2), h = x.dim(3), w = x.dim(4);
  auto coord = [](std::size_t i, std::size_t src, std::size_t dst) {
    return (src == 1 || dst == 1) ? 0.0 : double(i) * double(src - 1) / double(dst - 1);
  };
  Tensor<T> y(Shape{B, C, D, H, W});
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t k = 0; k < D; ++k)
        for (std::size_t i = 0; i < H; ++i)
          for (std::size_t j = 0; j < W; ++j) {
            const double z = coord(k, d, D), r = coord(i, h, H), s = coord(j, w, W);
            const std::size_t z0 = std::size_t(std::floor(z)), r0 = std::size_t(std::floor(r)),
                              s0 = std::size_t(std::floor(s));
            const std::size_t z1 = std::min(z0 + 1, d - 1), r1 = std::min(r0 + 1, h - 1),
                              s1 = std::min(s0 + 1, w - 1);
            const double fz = z - z0, fr = r - r0, fs = s - s0;
            double v = 0;
            for (int a = 0; a < 2; ++a)
              for (int bb = 0; bb < 2; ++bb)
                for (int cc = 0; cc < 2; ++cc) {
                  const double wt = (a ? fz : 1 - fz) * (bb ? fr : 1 - fr) * (cc ? fs : 1 - fs);
                  v += wt * x.at({b, c, a ? z1 : z0, bb ? r1 : r0, cc ? s1 : s0});
                }
            y.at({b, c, k, i, j}) = T(v);
          }
  return y;
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& z) {
  Tensor<T> p(z.shape());
  const std::size_t B = z.dim(0), K = z.dim(1);
  for (std::size_t b = 0; b < B; ++b) {
    long double total = 0;
    for (std::size_t k = 0; k < K; ++k) total += std::exp((long double)z[b * K + k]);
    for (std::size_t k = 0; k < K; ++k) p[b * K + k] = T(std::exp((long double)z[b * K + k]) / total);
  }
  return p;
}

template <typename T>
double max_abs_diff(const Tensor<T>& a, const Tensor<T>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(double(a[i]) - double(b[i])));
  return m;
}

}  // namespace oracle
