#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tstcnn/dataset/annotation.hpp"

namespace tstcnn::dataset {

struct WindowSample {
  std::string video_id;
  long start = 0;
  long length = 0;
  std::string label;
};

/// One window centred on the segment midpoint (floor), shifted to stay inside the video.
/// Segments shorter than the window are extended around their midpoint; returns nullopt
/// when the video itself is shorter than the window.
inline std::optional<WindowSample> centered_window(const StrokeSegment& seg, long window, long video_frames) {
  tstcnn::detail::require(window >= 1, "window must be >= 1");
  if (video_frames < window) return std::nullopt;
  const long mid = (seg.start + seg.end) / 2;
  const long start = std::clamp(mid - window / 2, 0L, video_frames - window);
  return WindowSample{seg.video_id, start, window, seg.label};
}

/// Windows at seg.start, seg.start + stride, ... that fit inside the segment.
inline std::vector<WindowSample> sliding_windows(const StrokeSegment& seg, long window, long stride) {
  tstcnn::detail::require(window >= 1 && stride >= 1, "window and stride must be >= 1");
  std::vector<WindowSample> out;
  for (long s = seg.start; s + window <= seg.end; s += stride) out.push_back({seg.video_id, s, window, seg.label});
  return out;
}

}  // namespace tstcnn::dataset
