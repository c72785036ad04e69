#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "tstcnn/core/random.hpp"
#include "tstcnn/core/tensor.hpp"
#include "tstcnn/core/tensor_io.hpp"
#include "tstcnn/dataset/manifest.hpp"

namespace tstcnn::dataset {

/// Per-frame displacement of the patch while a stroke of this class is under way.
struct MotionPattern {
  std::string name;
  double dx = 0.0;
  double dy = 0.0;
};

struct SyntheticSpec {
  std::vector<MotionPattern> classes{{"left", -1.0, 0.0}, {"right", 1.0, 0.0}};
  bool negative_class = false;  // append "Non stroke" to the class list
  std::size_t videos = 2;
  std::size_t strokes_per_video = 12;
  long height = 32;
  long width = 32;
  long patch = 8;
  long stroke_min = 16;
  long stroke_max = 24;
  long gap_min = 16;
  long gap_max = 24;
  double background_noise = 0.02;   // per-frame Gaussian sensor noise
  double duplicate_rate = 0.0;      // probability of a second, overlapping annotation
  double duplicate_shift = 0.1;     // its start offset as a fraction of the stroke length
  double disagreement_rate = 0.0;   // probability of a second annotation with another label
  double fps = 120.0;
  std::uint64_t seed = 0;

  void validate() const {
    tstcnn::detail::require(classes.size() >= 2, "synthetic data needs at least two motion classes");
    tstcnn::detail::require(videos >= 1 && strokes_per_video >= 1, "videos and strokes_per_video must be >= 1");
    tstcnn::detail::require(height >= 1 && width >= 1 && patch >= 1 && patch <= std::min(height, width),
                            "patch must fit in the frame");
    tstcnn::detail::require(1 <= stroke_min && stroke_min <= stroke_max, "need 1 <= stroke_min <= stroke_max");
    tstcnn::detail::require(0 <= gap_min && gap_min <= gap_max, "need 0 <= gap_min <= gap_max");
    for (double p : {duplicate_rate, disagreement_rate})
      tstcnn::detail::require(p >= 0.0 && p <= 1.0, "rates must lie in [0, 1]");
    tstcnn::detail::require(duplicate_shift >= 0.0 && duplicate_shift < 1.0, "duplicate_shift must lie in [0, 1)");
  }
};

inline SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j) {
  SyntheticSpec s;
  try {
    if (j.contains("classes")) {
      s.classes.clear();
      for (const auto& c : j.at("classes"))
        s.classes.push_back({c.at("name").get<std::string>(), c.value("dx", 0.0), c.value("dy", 0.0)});
    }
    s.negative_class = j.value("negative_class", s.negative_class);
    s.videos = j.value("videos", s.videos);
    s.strokes_per_video = j.value("strokes_per_video", s.strokes_per_video);
    s.height = j.value("height", s.height);
    s.width = j.value("width", s.width);
    s.patch = j.value("patch", s.patch);
    s.stroke_min = j.value("stroke_min", s.stroke_min);
    s.stroke_max = j.value("stroke_max", s.stroke_max);
    s.gap_min = j.value("gap_min", s.gap_min);
    s.gap_max = j.value("gap_max", s.gap_max);
    s.background_noise = j.value("background_noise", s.background_noise);
    s.duplicate_rate = j.value("duplicate_rate", s.duplicate_rate);
    s.duplicate_shift = j.value("duplicate_shift", s.duplicate_shift);
    s.disagreement_rate = j.value("disagreement_rate", s.disagreement_rate);
    s.fps = j.value("fps", s.fps);
    s.seed = j.value("seed", s.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed synthetic spec: ") + e.what());
  }
  s.validate();
  return s;
}

struct SyntheticVideo {
  std::string id;
  Tensorf rgb;                         // (3, T, H, W) in [0, 1] plus noise
  std::vector<StrokeSegment> truth;    // ground-truth strokes
};

struct SyntheticDataset {
  Manifest manifest;  // raw annotations only; run curate() for segments and splits
  std::vector<SyntheticVideo> videos;
};

namespace detail {

// Paints the patch with its top-left corner at (x, y); coordinates wrap around the frame.
inline void paint_patch(Tensorf& v, long t, double x, double y, const Tensorf& texture) {
  const long H = long(v.dim(2)), W = long(v.dim(3)), P = long(texture.dim(1));
  const long x0 = long(std::lround(x)), y0 = long(std::lround(y));
  for (long c = 0; c < 3; ++c)
    for (long i = 0; i < P; ++i)
      for (long j = 0; j < P; ++j) {
        const long r = ((y0 + i) % H + H) % H, q = ((x0 + j) % W + W) % W;
        v.at({std::size_t(c), std::size_t(t), std::size_t(r), std::size_t(q)}) =
            texture.at({std::size_t(c), std::size_t(i), std::size_t(j)});
      }
}

}  // namespace detail

/// A textured patch over a static textured background. During a stroke the patch moves by
/// the class displacement each frame; between strokes it rests where it stopped. Stroke
/// labels cycle through the motion classes so every class is equally represented.
inline SyntheticVideo render_synthetic_video(const SyntheticSpec& spec, const std::string& id,
                                             const std::vector<StrokeSegment>& plan, long frames, Rng& rng) {
  const auto H = std::size_t(spec.height), W = std::size_t(spec.width), P = std::size_t(spec.patch);
  Tensorf background = uniform_tensor<float>({3, H, W}, rng, 0.0, 0.4);
  Tensorf texture = uniform_tensor<float>({3, P, P}, rng, 0.6, 1.0);
  SyntheticVideo out{id, Tensorf({3, std::size_t(frames), H, W}), plan};
  double x = rng.uniform(0.0, double(W)), y = rng.uniform(0.0, double(H));
  std::size_t next = 0;
  for (long t = 0; t < frames; ++t) {
    while (next < plan.size() && plan[next].end <= t) ++next;
    if (next < plan.size() && t > plan[next].start) {
      for (const auto& m : spec.classes)
        if (m.name == plan[next].label) x += m.dx, y += m.dy;
    }
    for (std::size_t c = 0; c < 3; ++c) {
      float* dst = out.rgb.data() + (c * std::size_t(frames) + std::size_t(t)) * H * W;
      const float* src = background.data() + c * H * W;
      for (std::size_t k = 0; k < H * W; ++k) dst[k] = src[k] + float(spec.background_noise * rng.normal());
    }
    detail::paint_patch(out.rgb, t, x, y, texture);
  }
  return out;
}

inline SyntheticDataset generate_synthetic_dataset(const SyntheticSpec& spec) {
  spec.validate();
  SyntheticDataset ds;
  Manifest& m = ds.manifest;
  m.fps = spec.fps;
  m.classes.clear();
  for (const auto& c : spec.classes) m.classes.push_back(c.name);
  if (spec.negative_class) m.classes.push_back(kNonStroke);
  (void)m.taxonomy();

  Rng rng(spec.seed);
  std::size_t stroke_index = 0;
  for (std::size_t v = 0; v < spec.videos; ++v) {
    const std::string id = "synth" + std::to_string(v);
    std::vector<StrokeSegment> plan;
    long t = rng.between(spec.gap_min, spec.gap_max);
    for (std::size_t s = 0; s < spec.strokes_per_video; ++s, ++stroke_index) {
      const long len = rng.between(spec.stroke_min, spec.stroke_max);
      const auto& cls = spec.classes[stroke_index % spec.classes.size()].name;
      plan.push_back({id, t, t + len, cls, SegmentSource::annotated, {cls}});
      t += len + rng.between(spec.gap_min, spec.gap_max);
    }
    const long frames = t;
    for (const auto& p : plan) {
      const Handedness hand = rng.below(2) ? Handedness::left : Handedness::right;
      m.annotations.push_back({id, p.start, p.end, p.label, "a0", hand});
      if (rng.uniform() < spec.duplicate_rate) {
        const long shift = long(std::lround(spec.duplicate_shift * double(p.length())));
        m.annotations.push_back({id, p.start + shift, std::min(frames, p.end + shift), p.label, "a1", hand});
      }
      if (rng.uniform() < spec.disagreement_rate) {
        std::string other = p.label;
        while (other == p.label) other = spec.classes[rng.below(spec.classes.size())].name;
        m.annotations.push_back({id, p.start, p.end, other, "a2", hand});
      }
    }
    ds.videos.push_back(render_synthetic_video(spec, id, plan, frames, rng));
    m.videos.push_back({id, "videos/" + id + ".tt3d", frames, "", ""});
  }
  m.validate();
  return ds;
}

/// Writes videos/<id>.tt3d and manifest.json under `dir`.
inline Manifest write_synthetic_dataset(const SyntheticDataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "videos");
  for (const auto& v : ds.videos) io::save_tensor(dir / "videos" / (v.id + ".tt3d"), v.rgb);
  Manifest m = ds.manifest;
  m.base_dir = dir;
  save_manifest(dir / "manifest.json", m);
  return m;
}

}  // namespace tstcnn::dataset
