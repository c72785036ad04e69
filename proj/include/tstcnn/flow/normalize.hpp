#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "tstcnn/core/error.hpp"
#include "tstcnn/core/tensor.hpp"

namespace tstcnn::flow {

enum class NormalizationKind { normal, max };

struct NormalizationMethod {
  NormalizationKind kind = NormalizationKind::normal;
  double epsilon_guard = 1e-8;
};

inline NormalizationKind parse_normalization(const std::string& s) {
  if (s == "normal") return NormalizationKind::normal;
  if (s == "max") return NormalizationKind::max;
  throw ValidationError("unknown normalization '" + s + "' (expected normal or max)");
}

inline std::string to_string(NormalizationKind k) { return k == NormalizationKind::normal ? "normal" : "max"; }

struct NormalizedComponent {
  std::vector<float> values;
  bool degenerate = false;
};

namespace detail {

inline float sign(double v) { return v > 0 ? 1.0f : v < 0 ? -1.0f : 0.0f; }

inline void require_finite(std::span<const float> v) {
  for (float x : v)
    if (!std::isfinite(x)) throw NumericError("flow component contains non-finite values");
}

}  // namespace detail

/// v' = v / (mu + 3 sigma) over the whole component, then SIGN(v') wherever |v'| >= 1.
/// A divisor at or below the guard yields zeros and the degenerate flag.
inline NormalizedComponent normalize_normal(std::span<const float> v, double epsilon_guard = 1e-8) {
  tstcnn::detail::require(epsilon_guard > 0.0, "epsilon guard must be > 0");
  detail::require_finite(v);
  NormalizedComponent out;
  out.values.assign(v.size(), 0.0f);
  if (v.empty()) {
    out.degenerate = true;
    return out;
  }
  double mean = 0.0;
  for (float x : v) mean += x;
  mean /= double(v.size());
  double var = 0.0;
  for (float x : v) var += (x - mean) * (x - mean);
  const double divisor = mean + 3.0 * std::sqrt(var / double(v.size()));
  if (divisor <= epsilon_guard) {
    out.degenerate = true;
    return out;
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double s = double(v[i]) / divisor;
    out.values[i] = std::abs(s) < 1.0 ? float(s) : detail::sign(s);
  }
  return out;
}

/// v' = v / max |v| over the component.
inline NormalizedComponent normalize_max(std::span<const float> v) {
  detail::require_finite(v);
  NormalizedComponent out;
  out.values.assign(v.size(), 0.0f);
  double peak = 0.0;
  for (float x : v) peak = std::max(peak, double(std::abs(x)));
  if (peak == 0.0) {
    out.degenerate = true;
    return out;
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double s = double(v[i]) / peak;
    out.values[i] = std::abs(s) < 1.0 ? float(s) : detail::sign(s);
  }
  return out;
}

inline NormalizedComponent normalize_component(std::span<const float> v, const NormalizationMethod& m) {
  return m.kind == NormalizationKind::normal ? normalize_normal(v, m.epsilon_guard) : normalize_max(v);
}

struct NormalizedFlow {
  Tensorf flow;                            // (2, F, H, W)
  std::array<bool, 2> degenerate{};        // per component
};

/// Normalizes each component of a (2, F, H, W) flow window independently.
inline NormalizedFlow normalize_flow(const Tensorf& flow, const NormalizationMethod& m) {
  tstcnn::detail::require_shape(flow.rank() == 4 && flow.dim(0) == 2,
                                "flow window must be (2, F, H, W), got " + flow.shape().str());
  NormalizedFlow out{Tensorf(flow.shape()), {}};
  const std::size_t n = flow.numel() / 2;
  for (std::size_t c = 0; c < 2; ++c) {
    auto r = normalize_component(flow.values().subspan(c * n, n), m);
    std::copy(r.values.begin(), r.values.end(), out.flow.data() + c * n);
    out.degenerate[c] = r.degenerate;
  }
  return out;
}

}  // namespace tstcnn::flow
