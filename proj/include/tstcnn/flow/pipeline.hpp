#pragma once

#include "tstcnn/flow/block_matching.hpp"
#include "tstcnn/flow/masking.hpp"
#include "tstcnn/flow/normalize.hpp"

namespace tstcnn::flow {

/// Luma of a (3, T, H, W) RGB clip in [0, 1] -> (T, H, W).
inline Tensorf to_gray(const Tensorf& rgb) {
  tstcnn::detail::require_shape(rgb.rank() == 4 && rgb.dim(0) == 3, "expected (3, T, H, W) video, got " + rgb.shape().str());
  const std::size_t n = rgb.numel() / 3;
  Tensorf gray(Shape{rgb.dim(1), rgb.dim(2), rgb.dim(3)});
  for (std::size_t i = 0; i < n; ++i)
    gray[i] = 0.299f * rgb[i] + 0.587f * rgb[n + i] + 0.114f * rgb[2 * n + i];
  return gray;
}

/// Raw block-matching flow for every consecutive frame pair: (2, T - 1, H, W).
inline Tensorf estimate_video_flow(const Tensorf& gray, const BlockMatchingOptions& opt = {}) {
  tstcnn::detail::require_shape(gray.rank() == 3 && gray.dim(0) >= 2, "flow needs at least two frames");
  const std::size_t T = gray.dim(0), H = gray.dim(1), W = gray.dim(2), n = H * W;
  Tensorf out(Shape{2, T - 1, H, W});
  for (std::size_t t = 0; t + 1 < T; ++t) {
    Tensorf a(Shape{H, W}, std::vector<float>(gray.data() + t * n, gray.data() + (t + 1) * n));
    Tensorf b(Shape{H, W}, std::vector<float>(gray.data() + (t + 1) * n, gray.data() + (t + 2) * n));
    const Tensorf f = estimate_flow_block_matching(a, b, opt);
    std::copy(f.data(), f.data() + n, out.data() + t * n);
    std::copy(f.data() + n, f.data() + 2 * n, out.data() + (T - 1) * n + t * n);
  }
  return out;
}

/// Per-pair foreground: a pixel of pair (t, t+1) is foreground if either frame marks it.
inline Tensorf pair_masks(const Tensorf& frame_masks) {
  const std::size_t T = frame_masks.dim(0), n = frame_masks.numel() / T;
  Tensorf out(Shape{T - 1, frame_masks.dim(1), frame_masks.dim(2)});
  for (std::size_t t = 0; t + 1 < T; ++t)
    for (std::size_t i = 0; i < n; ++i)
      out[t * n + i] = std::max(frame_masks[t * n + i], frame_masks[(t + 1) * n + i]);
  return out;
}

struct FlowWindowOptions {
  NormalizationMethod method;
  bool apply_mask = true;
};

struct FlowWindow {
  Tensorf flow;  // (2, length, H, W), last frame zero padding
  std::array<bool, 2> degenerate{};
};

/// Cuts the flow input for frames [start, start + length) out of a whole-video field of
/// F >= T - 1 pair frames: the length - 1 interior pairs are normalized over the window,
/// masked, and zero padded by one frame at the end.
inline FlowWindow flow_window(const Tensorf& video_flow, const Tensorf* masks, std::size_t start,
                              std::size_t length, const FlowWindowOptions& opt) {
  tstcnn::detail::require_shape(video_flow.rank() == 4 && video_flow.dim(0) == 2, "video flow must be (2, F, H, W)");
  tstcnn::detail::require(length >= 2, "flow window needs at least two frames");
  const std::size_t F = video_flow.dim(1), H = video_flow.dim(2), W = video_flow.dim(3), n = H * W;
  tstcnn::detail::require_shape(start + length - 1 <= F, "flow window [" + std::to_string(start) + ", " +
                                                             std::to_string(start + length) + ") exceeds " +
                                                             std::to_string(F) + " flow frames");
  const std::size_t pairs = length - 1;
  Tensorf slice(Shape{2, pairs, H, W});
  for (std::size_t c = 0; c < 2; ++c)
    std::copy(video_flow.data() + (c * F + start) * n, video_flow.data() + (c * F + start + pairs) * n,
              slice.data() + c * pairs * n);
  auto norm = normalize_flow(slice, opt.method);
  Tensorf body = norm.flow;
  if (opt.apply_mask && masks) {
    tstcnn::detail::require_shape(masks->rank() == 3 && masks->dim(0) >= start + pairs, "mask sequence too short");
    Tensorf m(Shape{pairs, H, W}, std::vector<float>(masks->data() + start * n, masks->data() + (start + pairs) * n));
    body = apply_foreground_mask(body, m);
  }
  FlowWindow out{Tensorf(Shape{2, length, H, W}), norm.degenerate};
  for (std::size_t c = 0; c < 2; ++c)
    std::copy(body.data() + c * pairs * n, body.data() + (c + 1) * pairs * n, out.flow.data() + c * length * n);
  return out;
}

}  // namespace tstcnn::flow
