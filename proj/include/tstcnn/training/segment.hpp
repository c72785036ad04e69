#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "tstcnn/training/data.hpp"

namespace tstcnn::training {

struct WindowVote {
  long start = 0;
  long length = 0;
  std::size_t label = 0;
};

struct LabelledSpan {
  long start = 0;
  long end = 0;
  std::size_t label = 0;
};

struct VoteResult {
  std::vector<std::size_t> frame_labels;
  std::vector<LabelledSpan> segments;
};

struct VoteOptions {
  long window = 100;
  long stride = 10;
  long min_duration = 50;
};

/// Plurality vote per frame over the windows covering it. Ties, and frames no window
/// covers, go to `negative`; when `negative` is not a valid class the lowest tied index
/// wins instead. Runs of equal labels become segments; segments shorter than
/// `min_duration` are relabelled `negative` and merged with their neighbours.
inline VoteResult aggregate_votes(long frames, const std::vector<WindowVote>& votes, std::size_t classes,
                                  std::size_t negative, long min_duration) {
  tstcnn::detail::require(frames >= 1 && classes >= 1, "need at least one frame and one class");
  std::vector<std::size_t> counts(std::size_t(frames) * classes, 0);
  for (const auto& v : votes) {
    tstcnn::detail::require(v.label < classes, "vote label out of range");
    tstcnn::detail::require(v.start >= 0 && v.length >= 1 && v.start + v.length <= frames, "vote window outside video");
    for (long t = v.start; t < v.start + v.length; ++t) ++counts[std::size_t(t) * classes + v.label];
  }
  const bool has_negative = negative < classes;
  VoteResult r;
  r.frame_labels.resize(std::size_t(frames));
  for (long t = 0; t < frames; ++t) {
    const auto* c = counts.data() + std::size_t(t) * classes;
    const auto best = std::size_t(std::max_element(c, c + classes) - c);
    const auto ties = std::count(c, c + classes, c[best]);
    r.frame_labels[std::size_t(t)] = ties > 1 && has_negative ? negative : best;
  }
  auto runs = [&] {
    std::vector<LabelledSpan> out;
    for (long t = 0; t < frames; ++t) {
      const auto l = r.frame_labels[std::size_t(t)];
      if (out.empty() || out.back().label != l) out.push_back({t, t + 1, l});
      else out.back().end = t + 1;
    }
    return out;
  };
  r.segments = runs();
  if (has_negative) {
    for (const auto& s : r.segments)
      if (s.end - s.start < min_duration)
        std::fill(r.frame_labels.begin() + s.start, r.frame_labels.begin() + s.end, negative);
    r.segments = runs();
  }
  return r;
}

/// Slides the window over a whole video (windows at 0, stride, 2 stride, ...) and votes.
template <typename T>
VoteResult vote_over_windows(model::Tstcnn<T>& net, VideoStore& store, const std::string& video_id,
                             const VoteOptions& opt, const FlowOptions& flow_opt, std::size_t negative,
                             std::size_t batch_size = 8) {
  const auto& cfg = net.config();
  tstcnn::detail::require(opt.window == long(cfg.window_frames), "vote window must equal the model window");
  tstcnn::detail::require(opt.stride >= 1, "stride must be >= 1");
  const long frames = long(store.get(video_id, cfg.uses_flow()).rgb.dim(1));
  tstcnn::detail::require(frames >= opt.window, "video " + video_id + " (" + std::to_string(frames) +
                                                    " frames) is shorter than the window");
  std::vector<long> starts;
  for (long s = 0; s + opt.window <= frames; s += opt.stride) starts.push_back(s);
  std::vector<WindowVote> votes;
  for (std::size_t b = 0; b < starts.size(); b += batch_size) {
    std::vector<Sample> chunk;
    std::vector<std::size_t> idx;
    for (std::size_t i = b; i < std::min(starts.size(), b + batch_size); ++i) {
      idx.push_back(chunk.size());
      chunk.push_back(make_sample(store, video_id, starts[i], 0, cfg, flow_opt));
    }
    const auto scores = net.forward(make_batch<T>(chunk, idx, cfg), nn::Mode::eval);
    for (std::size_t i = 0; i < idx.size(); ++i) votes.push_back({starts[b + i], opt.window, scores.argmax(i)});
  }
  return aggregate_votes(frames, votes, cfg.n_classes, negative, opt.min_duration);
}

inline double interval_iou(long a0, long a1, long b0, long b1) {
  const long inter = std::max(0L, std::min(a1, b1) - std::max(a0, b0));
  const long uni = (a1 - a0) + (b1 - b0) - inter;
  return uni > 0 ? double(inter) / double(uni) : 0.0;
}

}  // namespace tstcnn::training
