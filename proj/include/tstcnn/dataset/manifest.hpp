#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tstcnn/dataset/annotation.hpp"
#include "tstcnn/dataset/split.hpp"
#include "tstcnn/dataset/taxonomy.hpp"

namespace tstcnn::dataset {

struct VideoEntry {
  std::string id;
  std::string path;  // TT3D (3, T, H, W); relative paths resolve against the manifest directory
  long frames = 0;
  std::string flow_path;  // optional (2, T-1 or T, H, W) flow
  std::string mask_path;  // optional (T-1, H, W) foreground masks aligned with flow frames
};

/// Dataset description. `annotations` are raw annotator claims; `segments` and `splits`
/// are filled in by curation.
struct Manifest {
  double fps = 120.0;
  std::vector<std::string> classes = ttstroke21_classes();
  std::vector<VideoEntry> videos;
  std::vector<Annotation> annotations;
  std::vector<StrokeSegment> segments;
  std::map<std::string, Split> splits;
  std::string flow_normalization;  // set by the flow stage
  std::filesystem::path base_dir;  // not serialized

  ClassTaxonomy taxonomy() const { return ClassTaxonomy(classes); }

  const VideoEntry& video(const std::string& id) const {
    for (const auto& v : videos)
      if (v.id == id) return v;
    throw ValidationError("unknown video id '" + id + "'");
  }

  std::filesystem::path resolve(const std::string& p) const {
    const std::filesystem::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  }

  std::vector<StrokeSegment> segments_in(Split split) const {
    std::vector<StrokeSegment> out;
    for (const auto& s : segments) {
      auto it = splits.find(segment_key(s));
      if (it != splits.end() && it->second == split) out.push_back(s);
    }
    return out;
  }

  void validate() const {
    tstcnn::detail::require(fps > 0.0, "manifest fps must be positive");
    const auto tax = taxonomy();
    std::map<std::string, long> frames;
    for (const auto& v : videos) {
      tstcnn::detail::require(!v.id.empty(), "video id must not be empty");
      tstcnn::detail::require(v.frames >= 1, "video '" + v.id + "' must have at least one frame");
      tstcnn::detail::require(frames.emplace(v.id, v.frames).second, "duplicate video id '" + v.id + "'");
    }
    auto check_range = [&](const std::string& vid, long s, long e, const std::string& what) {
      auto it = frames.find(vid);
      tstcnn::detail::require(it != frames.end(), what + " refers to unknown video '" + vid + "'");
      tstcnn::detail::require(0 <= s && s < e && e <= it->second,
                              what + " [" + std::to_string(s) + ", " + std::to_string(e) + ") is outside video '" +
                                  vid + "' of " + std::to_string(it->second) + " frames");
    };
    for (const auto& a : annotations) {
      check_range(a.video_id, a.start, a.end, "annotation");
      tstcnn::detail::require(tax.contains(a.label), "annotation label '" + a.label + "' is not a known class");
    }
    for (const auto& s : segments) {
      check_range(s.video_id, s.start, s.end, "segment");
      tstcnn::detail::require(tax.contains(s.label), "segment label '" + s.label + "' is not a known class");
      tstcnn::detail::require(s.source != SegmentSource::negative || s.label == kNonStroke,
                              "negative segments must be labelled '" + kNonStroke + "'");
    }
  }
};

inline nlohmann::json to_json(const Manifest& m) {
  using nlohmann::json;
  json j;
  j["fps"] = m.fps;
  j["classes"] = m.classes;
  j["videos"] = json::array();
  for (const auto& v : m.videos) {
    json e{{"id", v.id}, {"path", v.path}, {"frames", v.frames}};
    if (!v.flow_path.empty()) e["flow_path"] = v.flow_path;
    if (!v.mask_path.empty()) e["mask_path"] = v.mask_path;
    j["videos"].push_back(e);
  }
  j["annotations"] = json::array();
  for (const auto& a : m.annotations)
    j["annotations"].push_back({{"video_id", a.video_id},
                                {"start", a.start},
                                {"end", a.end},
                                {"label", a.label},
                                {"annotator", a.annotator},
                                {"handedness", to_string(a.handedness)}});
  if (!m.segments.empty()) {
    j["segments"] = json::array();
    for (const auto& s : m.segments)
      j["segments"].push_back({{"video_id", s.video_id},
                               {"start", s.start},
                               {"end", s.end},
                               {"label", s.label},
                               {"source", to_string(s.source)}});
  }
  j["splits"] = json::object();
  for (const auto& [k, s] : m.splits) j["splits"][k] = to_string(s);
  if (!m.flow_normalization.empty()) j["flow_normalization"] = m.flow_normalization;
  return j;
}

inline Manifest manifest_from_json(const nlohmann::json& j) {
  Manifest m;
  try {
    m.fps = j.value("fps", 120.0);
    if (j.contains("classes")) m.classes = j.at("classes").get<std::vector<std::string>>();
    for (const auto& v : j.at("videos"))
      m.videos.push_back({v.at("id").get<std::string>(), v.at("path").get<std::string>(), v.at("frames").get<long>(),
                          v.value("flow_path", std::string()), v.value("mask_path", std::string())});
    const auto annotations = j.value("annotations", nlohmann::json::array());
    for (const auto& a : annotations)
      m.annotations.push_back({a.at("video_id").get<std::string>(), a.at("start").get<long>(),
                               a.at("end").get<long>(), a.at("label").get<std::string>(),
                               a.value("annotator", std::string()),
                               parse_handedness(a.value("handedness", std::string("right")))});
    const auto segments = j.value("segments", nlohmann::json::array());
    for (const auto& s : segments) {
      StrokeSegment seg{s.at("video_id").get<std::string>(), s.at("start").get<long>(), s.at("end").get<long>(),
                        s.at("label").get<std::string>(),
                        parse_source(s.value("source", std::string("annotated"))), {}};
      seg.labels = {seg.label};
      m.segments.push_back(seg);
    }
    const auto splits = j.value("splits", nlohmann::json::object());
    for (const auto& [k, v] : splits.items()) m.splits[k] = parse_split(v.get<std::string>());
    m.flow_normalization = j.value("flow_normalization", std::string());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed manifest: ") + e.what());
  }
  (void)m.taxonomy();
  m.validate();
  return m;
}

inline Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open manifest " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("manifest " + path.string() + " is not valid JSON: " + e.what());
  }
  Manifest m = manifest_from_json(j);
  m.base_dir = path.parent_path();
  return m;
}

inline void save_manifest(const std::filesystem::path& path, const Manifest& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest " + path.string());
  out << to_json(m).dump(2) << '\n';
}

}  // namespace tstcnn::dataset
