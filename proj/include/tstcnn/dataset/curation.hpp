#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>
#include <vector>

#include "tstcnn/dataset/annotation.hpp"
#include "tstcnn/dataset/taxonomy.hpp"

namespace tstcnn::dataset {

namespace detail {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a), b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

// Overlap strictly above a quarter of the shorter interval.
inline bool same_stroke(const StrokeSegment& a, const StrokeSegment& b) {
  return 4 * overlap(a.start, a.end, b.start, b.end) > std::min(a.length(), b.length());
}

inline std::vector<StrokeSegment> merge_groups(std::vector<StrokeSegment> items) {
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    return std::tie(a.start, a.end, a.labels) < std::tie(b.start, b.end, b.labels);
  });
  UnionFind uf(items.size());
  for (std::size_t i = 0; i < items.size(); ++i)
    for (std::size_t j = i + 1; j < items.size() && items[j].start < items[i].end; ++j)
      if (same_stroke(items[i], items[j])) uf.unite(i, j);
  std::vector<StrokeSegment> out;
  std::vector<long> slot(items.size(), -1);
  for (std::size_t i = 0; i < items.size(); ++i) {
    const std::size_t root = uf.find(i);
    if (slot[root] < 0) {
      slot[root] = long(out.size());
      out.push_back(items[i]);
      continue;
    }
    auto& g = out[std::size_t(slot[root])];
    g.start = std::min(g.start, items[i].start);
    g.end = std::max(g.end, items[i].end);
    g.labels.insert(g.labels.end(), items[i].labels.begin(), items[i].labels.end());
    g.source = SegmentSource::fused;
  }
  for (auto& g : out) std::sort(g.labels.begin(), g.labels.end());
  return out;
}

}  // namespace detail

/// Merges the annotations of one video whose overlap exceeds 25% of the shorter one,
/// transitively. Merged extents can create new qualifying overlaps, so merging repeats
/// until no pair of output segments qualifies. Output is sorted by (start, end).
inline std::vector<StrokeSegment> fuse_overlapping_annotations(const std::vector<Annotation>& annotations) {
  std::vector<StrokeSegment> items;
  for (const auto& a : annotations) {
    tstcnn::detail::require(a.start >= 0 && a.start < a.end,
                            "annotation of " + a.video_id + " has invalid range [" + std::to_string(a.start) +
                                ", " + std::to_string(a.end) + ")");
    tstcnn::detail::require(annotations.front().video_id == a.video_id, "fusion expects annotations of one video");
    items.push_back({a.video_id, a.start, a.end, a.label, SegmentSource::annotated, {a.label}});
  }
  for (;;) {
    const std::size_t before = items.size();
    items = detail::merge_groups(std::move(items));
    if (items.size() == before) break;
  }
  for (auto& s : items) s.label = s.labels.size() == 1 ? s.labels.front() : std::string();
  return items;
}

/// Keeps segments whose contributing labels all agree, labelled with that label.
inline std::vector<StrokeSegment> filter_inconsistent_labels(const std::vector<StrokeSegment>& fused) {
  std::vector<StrokeSegment> kept;
  for (const auto& s : fused) {
    if (s.labels.empty()) continue;
    if (std::adjacent_find(s.labels.begin(), s.labels.end(), std::not_equal_to<>()) != s.labels.end()) continue;
    kept.push_back(s);
    kept.back().label = s.labels.front();
  }
  return kept;
}

struct NegativeOptions {
  std::size_t window_frames = 100;
  std::size_t min_strokes = 11;  // "more than 10 detected strokes"
  double margin_fraction = 0.1;  // overlap with neighbouring strokes, fraction of the window

  long margin() const { return std::lround(margin_fraction * double(window_frames)); }
};

/// Non-stroke segments between consecutive strokes of a video, widened by the margin on
/// both sides and clipped to the video; only segments of at least one window are kept.
inline std::vector<StrokeSegment> extract_negative_segments(const std::string& video_id, long video_frames,
                                                            std::vector<StrokeSegment> strokes,
                                                            const NegativeOptions& opt = {}) {
  std::vector<StrokeSegment> out;
  if (strokes.size() < opt.min_strokes) return out;
  std::sort(strokes.begin(), strokes.end(),
            [](const auto& a, const auto& b) { return std::tie(a.start, a.end) < std::tie(b.start, b.end); });
  const long m = opt.margin();
  long covered = strokes.front().end;
  for (std::size_t i = 1; i < strokes.size(); ++i) {
    const long gap_start = covered, gap_end = strokes[i].start;
    covered = std::max(covered, strokes[i].end);
    if (gap_end <= gap_start) continue;
    const long s = std::max(0L, gap_start - m), e = std::min(video_frames, gap_end + m);
    if (e - s < long(opt.window_frames)) continue;
    out.push_back({video_id, s, e, kNonStroke, SegmentSource::negative, {kNonStroke}});
  }
  return out;
}

}  // namespace tstcnn::dataset
