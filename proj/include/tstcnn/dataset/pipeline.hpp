#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tstcnn/dataset/curation.hpp"
#include "tstcnn/dataset/manifest.hpp"
#include "tstcnn/dataset/stats.hpp"

namespace tstcnn::dataset {

struct CurationOptions {
  NegativeOptions negatives;
  SplitFractions fractions = kDefaultFractions;
  std::uint64_t seed = 0;
};

struct CurationReport {
  std::size_t annotations = 0;
  std::size_t fused_segments = 0;    // segments produced by fusion, before filtering
  std::size_t merged_segments = 0;   // of those, built from more than one annotation
  std::size_t dropped_inconsistent = 0;
  std::size_t strokes = 0;
  std::size_t negatives = 0;
  std::vector<std::string> warnings;
};

/// Fusion, consistency filtering, negative extraction and split, video by video in
/// manifest order. Replaces `segments` and `splits` of the returned manifest.
inline Manifest curate(const Manifest& input, const CurationOptions& opt, CurationReport* report = nullptr) {
  input.validate();
  Manifest m = input;
  m.segments.clear();
  m.splits.clear();
  CurationReport rep;
  rep.annotations = input.annotations.size();
  const bool has_negative_class = m.taxonomy().contains(kNonStroke);

  std::map<std::string, std::vector<Annotation>> by_video;
  for (const auto& a : input.annotations) by_video[a.video_id].push_back(a);
  for (const auto& v : input.videos) {
    auto it = by_video.find(v.id);
    if (it == by_video.end()) continue;
    const auto fused = fuse_overlapping_annotations(it->second);
    rep.fused_segments += fused.size();
    for (const auto& f : fused) rep.merged_segments += f.labels.size() > 1;
    const auto kept = filter_inconsistent_labels(fused);
    rep.dropped_inconsistent += fused.size() - kept.size();
    rep.strokes += kept.size();
    m.segments.insert(m.segments.end(), kept.begin(), kept.end());
    if (!has_negative_class) continue;
    const auto neg = extract_negative_segments(v.id, v.frames, kept, opt.negatives);
    rep.negatives += neg.size();
    m.segments.insert(m.segments.end(), neg.begin(), neg.end());
  }
  if (!has_negative_class)
    rep.warnings.push_back("class list has no '" + kNonStroke + "'; negative extraction skipped");

  auto split = split_dataset(m.segments, opt.fractions, opt.seed);
  m.splits = std::move(split.assignments);
  rep.warnings.insert(rep.warnings.end(), split.warnings.begin(), split.warnings.end());
  if (report) *report = rep;
  return m;
}

inline DatasetStats manifest_stats(const Manifest& m) { return compute_stats(m.segments, m.splits, m.classes); }

}  // namespace tstcnn::dataset
