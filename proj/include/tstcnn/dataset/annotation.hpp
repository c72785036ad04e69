#pragma once

#include <string>
#include <vector>

#include "tstcnn/core/error.hpp"

namespace tstcnn::dataset {

enum class Handedness { left, right };

inline std::string to_string(Handedness h) { return h == Handedness::left ? "left" : "right"; }
inline Handedness parse_handedness(const std::string& s) {
  if (s == "left") return Handedness::left;
  if (s == "right") return Handedness::right;
  throw ValidationError("handedness must be left or right, got '" + s + "'");
}

/// One annotator's claim: frames [start, end) of a video show `label`.
struct Annotation {
  std::string video_id;
  long start = 0;
  long end = 0;
  std::string label;
  std::string annotator;
  Handedness handedness = Handedness::right;
};

enum class SegmentSource { annotated, fused, negative };

inline std::string to_string(SegmentSource s) {
  switch (s) {
    case SegmentSource::annotated: return "annotated";
    case SegmentSource::fused: return "fused";
    case SegmentSource::negative: return "negative";
  }
  return "annotated";
}

inline SegmentSource parse_source(const std::string& s) {
  if (s == "annotated") return SegmentSource::annotated;
  if (s == "fused") return SegmentSource::fused;
  if (s == "negative") return SegmentSource::negative;
  throw ValidationError("unknown segment source '" + s + "'");
}

struct StrokeSegment {
  std::string video_id;
  long start = 0;
  long end = 0;
  std::string label;  // unanimous label once filtered; empty while labels disagree
  SegmentSource source = SegmentSource::annotated;
  std::vector<std::string> labels;  // sorted multiset of contributing annotation labels

  long length() const { return end - start; }
};

/// Stable identifier used by split assignments: "video:start-end".
inline std::string segment_key(const std::string& video, long start, long end) {
  return video + ":" + std::to_string(start) + "-" + std::to_string(end);
}
inline std::string segment_key(const StrokeSegment& s) { return segment_key(s.video_id, s.start, s.end); }

inline long overlap(long a0, long a1, long b0, long b1) { return std::max(0L, std::min(a1, b1) - std::max(a0, b0)); }

}  // namespace tstcnn::dataset
