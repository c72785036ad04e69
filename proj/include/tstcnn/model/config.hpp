#pragma once

#include <array>
#include <string>

#include "json.hpp"
#include "tstcnn/blocks/attention.hpp"
#include "tstcnn/core/error.hpp"

namespace tstcnn::model {

enum class Variant { rgb, flow, twin, late_fusion };

inline std::string to_string(Variant v) {
  switch (v) {
    case Variant::rgb: return "rgb";
    case Variant::flow: return "flow";
    case Variant::twin: return "twin";
    case Variant::late_fusion: return "late";
  }
  return "twin";
}

inline Variant parse_variant(const std::string& s) {
  if (s == "rgb") return Variant::rgb;
  if (s == "flow") return Variant::flow;
  if (s == "twin") return Variant::twin;
  if (s == "late" || s == "late_fusion") return Variant::late_fusion;
  throw ValidationError("unknown variant '" + s + "' (expected rgb, flow, twin or late)");
}

using Extents = std::array<std::size_t, 3>;  // (T, H, W)

struct ModelConfig {
  Variant variant = Variant::twin;
  bool attention = false;
  std::size_t window_frames = 100;
  std::size_t height = 120;
  std::size_t width = 120;
  std::array<std::size_t, 3> filters{30, 60, 80};
  std::size_t fc_size = 500;
  std::size_t n_classes = 21;
  std::size_t rgb_channels = 3;
  std::size_t flow_channels = 2;

  bool uses_rgb() const { return variant != Variant::flow; }
  bool uses_flow() const { return variant != Variant::rgb; }

  /// Extents after each of the three conv + pool stages.
  std::array<Extents, 3> stage_extents() const {
    std::array<Extents, 3> out{};
    Extents e{window_frames, height, width};
    for (int s = 0; s < 3; ++s) {
      for (auto& v : e) v /= 2;
      out[s] = e;
    }
    return out;
  }

  /// An attention block follows a pooling stage when every pooled extent can take the
  /// block's three internal halvings.
  std::array<bool, 3> attention_stages() const {
    std::array<bool, 3> on{};
    const auto ext = stage_extents();
    for (int s = 0; s < 3; ++s) {
      on[s] = attention;
      for (auto v : ext[s]) on[s] = on[s] && v >= blocks::kAttentionMinExtent;
    }
    return on;
  }

  std::size_t flatten_length() const {
    const auto e = stage_extents()[2];
    return filters[2] * e[0] * e[1] * e[2];
  }

  void validate() const {
    Extents e{window_frames, height, width};
    for (int s = 0; s < 3; ++s) {
      for (auto v : e)
        detail::require(v >= 2, "window " + std::to_string(window_frames) + "x" +
                                    std::to_string(height) + "x" + std::to_string(width) +
                                    " too small for pooling stage " + std::to_string(s + 1));
      for (auto& v : e) v /= 2;
    }
    for (auto f : filters) detail::require(f >= 1, "filter counts must be >= 1");
    detail::require(fc_size >= 1, "fc_size must be >= 1");
    detail::require(n_classes >= 2, "n_classes must be >= 2");
    detail::require(rgb_channels >= 1 && flow_channels >= 1, "channel counts must be >= 1");
    if (attention)
      detail::require(attention_stages()[0],
                      "attention needs every extent >= 16 so the first pooled stage is >= 8");
  }
};

inline nlohmann::json to_json(const ModelConfig& c) {
  return nlohmann::json{{"variant", to_string(c.variant)},
                        {"attention", c.attention},
                        {"window_frames", c.window_frames},
                        {"spatial", {c.height, c.width}},
                        {"filters", c.filters},
                        {"fc_size", c.fc_size},
                        {"n_classes", c.n_classes},
                        {"channels", {c.rgb_channels, c.flow_channels}}};
}

inline ModelConfig model_config_from_json(const nlohmann::json& j) {
  try {
    ModelConfig c;
    c.variant = parse_variant(j.at("variant").get<std::string>());
    c.attention = j.at("attention").get<bool>();
    c.window_frames = j.at("window_frames").get<std::size_t>();
    c.height = j.at("spatial").at(0).get<std::size_t>();
    c.width = j.at("spatial").at(1).get<std::size_t>();
    c.filters = j.at("filters").get<std::array<std::size_t, 3>>();
    c.fc_size = j.at("fc_size").get<std::size_t>();
    c.n_classes = j.at("n_classes").get<std::size_t>();
    c.rgb_channels = j.at("channels").at(0).get<std::size_t>();
    c.flow_channels = j.at("channels").at(1).get<std::size_t>();
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("invalid model config: ") + e.what());
  }
}

}  // namespace tstcnn::model
