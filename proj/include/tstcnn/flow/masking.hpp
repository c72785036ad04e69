#pragma once

#include <cmath>

#include "tstcnn/core/error.hpp"
#include "tstcnn/core/tensor.hpp"

namespace tstcnn::flow {

inline void require_binary_mask(const Tensorf& mask) {
  for (float m : mask.values())
    tstcnn::detail::require(m == 0.0f || m == 1.0f, "foreground mask values must be 0 or 1");
}

/// Zeroes flow vectors of a (2, F, H, W) field where the (F, H, W) mask is 0.
inline Tensorf apply_foreground_mask(const Tensorf& flow, const Tensorf& mask) {
  tstcnn::detail::require_shape(flow.rank() == 4 && flow.dim(0) == 2 && mask.rank() == 3 &&
                                    mask.dim(0) == flow.dim(1) && mask.dim(1) == flow.dim(2) &&
                                    mask.dim(2) == flow.dim(3),
                                "flow " + flow.shape().str() + " and mask " + mask.shape().str() +
                                    " extents differ");
  require_binary_mask(mask);
  Tensorf out = flow;
  const std::size_t n = mask.numel();
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t i = 0; i < n; ++i)
      if (mask[i] == 0.0f) out[c * n + i] = 0.0f;
  return out;
}

/// Running-mean background model over (T, H, W) gray frames. The background for frame
/// t is the mean of frames 0..t-1; frame 0 is background by definition.
inline Tensorf background_mask_baseline(const Tensorf& frames, float threshold) {
  tstcnn::detail::require(threshold > 0.0f, "foreground threshold must be > 0");
  tstcnn::detail::require_shape(frames.rank() == 3 && frames.dim(0) >= 2,
                                "background model needs (T >= 2, H, W) frames, got " + frames.shape().str());
  const std::size_t T = frames.dim(0), n = frames.dim(1) * frames.dim(2);
  Tensorf mask(frames.shape());
  std::vector<double> background(frames.data(), frames.data() + n);
  for (std::size_t t = 1; t < T; ++t) {
    const float* f = frames.data() + t * n;
    float* m = mask.data() + t * n;
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = std::abs(double(f[i]) - background[i]) > threshold ? 1.0f : 0.0f;
      background[i] += (double(f[i]) - background[i]) / double(t + 1);
    }
  }
  return mask;
}

}  // namespace tstcnn::flow
