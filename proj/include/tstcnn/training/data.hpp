#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "tstcnn/core/tensor_io.hpp"
#include "tstcnn/dataset/manifest.hpp"
#include "tstcnn/dataset/windows.hpp"
#include "tstcnn/flow/pipeline.hpp"
#include "tstcnn/model/tstcnn.hpp"

namespace tstcnn::training {

/// One training/evaluation window, already at model resolution.
struct Sample {
  std::string key;   // segment key of the source segment
  std::string video_id;
  long start = 0;
  std::size_t label = 0;
  Tensorf rgb;   // (3, T, H, W), empty when the model has no rgb stream
  Tensorf flow;  // (2, T, H, W), empty when the model has no flow stream
};

struct FlowOptions {
  flow::FlowWindowOptions window;
  flow::BlockMatchingOptions block;
  float mask_threshold = 0.1f;
};

/// Nearest-neighbour spatial resize of (C, T, H, W) or (T, H, W) along the last two axes.
inline Tensorf resize_nearest(const Tensorf& x, std::size_t h, std::size_t w) {
  tstcnn::detail::require_shape(x.rank() >= 2, "resize needs at least two axes");
  const std::size_t H = x.dim(x.rank() - 2), W = x.dim(x.rank() - 1);
  if (H == h && W == w) return x;
  const std::size_t planes = x.numel() / (H * W);
  auto dims = x.shape().dims();
  dims[dims.size() - 2] = h;
  dims[dims.size() - 1] = w;
  Tensorf out{Shape(dims)};
  for (std::size_t p = 0; p < planes; ++p)
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < w; ++j)
        out[(p * h + i) * w + j] = x[(p * H + i * H / h) * W + j * W / w];
  return out;
}

/// Loads videos, flow and masks once per video id, resized to the model resolution.
/// Flow and masks come from the manifest when present and are estimated otherwise.
class VideoStore {
 public:
  VideoStore(const dataset::Manifest& manifest, std::size_t height, std::size_t width, FlowOptions opt)
      : manifest_(manifest), h_(height), w_(width), opt_(opt) {}

  struct Entry {
    Tensorf rgb;    // (3, T, h, w)
    Tensorf flow;   // (2, F, h, w)
    Tensorf masks;  // (F, h, w), empty when masking is disabled
    bool has_flow = false;
  };

  const Entry& get(const std::string& id, bool need_flow) {
    auto& e = cache_[id];
    const auto& v = manifest_.video(id);
    if (e.rgb.empty()) {
      Tensorf full = io::load_tensor(manifest_.resolve(v.path));
      tstcnn::detail::require_shape(full.rank() == 4 && full.dim(0) == 3,
                                    "video " + id + " must be a (3, T, H, W) tensor, got " + full.shape().str());
      tstcnn::detail::require(long(full.dim(1)) == v.frames, "video " + id + " has " + std::to_string(full.dim(1)) +
                                                                 " frames, manifest says " + std::to_string(v.frames));
      e.rgb = resize_nearest(full, h_, w_);
      if (need_flow) load_flow(e, full, v);
    } else if (need_flow && !e.has_flow) {
      load_flow(e, io::load_tensor(manifest_.resolve(v.path)), v);
    }
    return e;
  }

 private:
  void load_flow(Entry& e, const Tensorf& full, const dataset::VideoEntry& v) {
    Tensorf gray;
    Tensorf fl;
    if (!v.flow_path.empty()) {
      fl = io::load_tensor(manifest_.resolve(v.flow_path));
      tstcnn::detail::require_shape(fl.rank() == 4 && fl.dim(0) == 2 && fl.dim(1) + 1 >= std::size_t(v.frames) &&
                                        fl.dim(2) == full.dim(2) && fl.dim(3) == full.dim(3),
                                    "flow of " + v.id + " must be (2, T-1 or T, H, W), got " + fl.shape().str());
    } else {
      gray = flow::to_gray(full);
      fl = flow::estimate_video_flow(gray, opt_.block);
    }
    e.flow = resize_nearest(fl, h_, w_);
    if (opt_.window.apply_mask) {
      Tensorf m;
      if (!v.mask_path.empty()) {
        m = io::load_tensor(manifest_.resolve(v.mask_path));
      } else {
        if (gray.empty()) gray = flow::to_gray(full);
        m = flow::pair_masks(flow::background_mask_baseline(gray, opt_.mask_threshold));
      }
      tstcnn::detail::require_shape(m.rank() == 3 && m.dim(0) + 1 >= std::size_t(v.frames),
                                    "masks of " + v.id + " must be (T-1, H, W), got " + m.shape().str());
      e.masks = resize_nearest(m, h_, w_);
    }
    e.has_flow = true;
  }

  const dataset::Manifest& manifest_;
  std::size_t h_, w_;
  FlowOptions opt_;
  std::map<std::string, Entry> cache_;
};

/// Cuts the rgb and flow inputs of window [start, start + T).
inline Sample make_sample(VideoStore& store, const std::string& video_id, long start, std::size_t label,
                          const model::ModelConfig& cfg, const FlowOptions& opt, std::string key = {}) {
  const auto& e = store.get(video_id, cfg.uses_flow());
  const std::size_t T = cfg.window_frames, n = cfg.height * cfg.width, frames = e.rgb.dim(1);
  tstcnn::detail::require(start >= 0 && std::size_t(start) + T <= frames,
                          "window at " + std::to_string(start) + " does not fit in " + video_id);
  Sample s{std::move(key), video_id, start, label, {}, {}};
  if (cfg.uses_rgb()) {
    s.rgb = Tensorf(Shape{3, T, cfg.height, cfg.width});
    for (std::size_t c = 0; c < 3; ++c)
      std::copy(e.rgb.data() + (c * frames + std::size_t(start)) * n,
                e.rgb.data() + (c * frames + std::size_t(start) + T) * n, s.rgb.data() + c * T * n);
  }
  if (cfg.uses_flow())
    s.flow = flow::flow_window(e.flow, e.masks.empty() ? nullptr : &e.masks, std::size_t(start), T, opt.window).flow;
  return s;
}

struct SampleSet {
  std::vector<Sample> samples;
  std::vector<std::string> warnings;
};

/// One centred window per segment of `split`.
inline SampleSet build_samples(const dataset::Manifest& manifest, dataset::Split split, const model::ModelConfig& cfg,
                               VideoStore& store, const FlowOptions& opt) {
  const auto tax = manifest.taxonomy();
  tstcnn::detail::require(tax.size() == cfg.n_classes, "manifest has " + std::to_string(tax.size()) +
                                                           " classes but the model predicts " +
                                                           std::to_string(cfg.n_classes));
  SampleSet out;
  for (const auto& seg : manifest.segments_in(split)) {
    const auto w = dataset::centered_window(seg, long(cfg.window_frames), manifest.video(seg.video_id).frames);
    if (!w) {
      out.warnings.push_back("skipping " + dataset::segment_key(seg) + ": video shorter than the window");
      continue;
    }
    out.samples.push_back(make_sample(store, seg.video_id, w->start, tax.index_of(seg.label), cfg, opt,
                                      dataset::segment_key(seg)));
  }
  return out;
}

template <typename T>
model::Batch<T> make_batch(const std::vector<Sample>& samples, const std::vector<std::size_t>& indices,
                           const model::ModelConfig& cfg) {
  tstcnn::detail::require(!indices.empty(), "empty batch");
  const std::size_t B = indices.size(), T_ = cfg.window_frames, H = cfg.height, W = cfg.width;
  model::Batch<T> b;
  auto fill = [&](Tensor<T>& dst, std::size_t C, auto member) {
    dst = Tensor<T>(Shape{B, C, T_, H, W});
    const std::size_t per = C * T_ * H * W;
    for (std::size_t i = 0; i < B; ++i) {
      const Tensorf& src = samples.at(indices[i]).*member;
      tstcnn::detail::require_shape(src.numel() == per, "sample " + samples[indices[i]].key + " has shape " +
                                                            src.shape().str() + ", model expects " +
                                                            Shape{C, T_, H, W}.str());
      for (std::size_t k = 0; k < per; ++k) dst[i * per + k] = T(src[k]);
    }
  };
  if (cfg.uses_rgb()) fill(b.rgb, cfg.rgb_channels, &Sample::rgb);
  if (cfg.uses_flow()) fill(b.flow, cfg.flow_channels, &Sample::flow);
  return b;
}

inline std::vector<std::size_t> labels_of(const std::vector<Sample>& samples, const std::vector<std::size_t>& idx) {
  std::vector<std::size_t> out;
  for (auto i : idx) out.push_back(samples.at(i).label);
  return out;
}

}  // namespace tstcnn::training
