#pragma once

#include <cstdint>
#include <span>

namespace tstcnn {

/// Fingerprint of the branch taken by every piecewise-linear op (ReLU sign, max-pool
/// winner) during a forward pass. Gradient checks compare fingerprints at x - eps
/// and x + eps to tell when a finite-difference step straddles a kink.
/// Off unless a KinkProbe is alive on the calling thread.
class KinkProbe {
 public:
  KinkProbe() : previous_(active_) { active_ = this; }
  ~KinkProbe() { active_ = previous_; }
  KinkProbe(const KinkProbe&) = delete;
  KinkProbe& operator=(const KinkProbe&) = delete;

  void reset() { hash_ = kSeed; }
  std::uint64_t fingerprint() const { return hash_; }

  static KinkProbe* active() { return active_; }

  void mix(std::uint64_t v) {
    hash_ ^= v + 0x9e3779b97f4a7c15ULL + (hash_ << 6) + (hash_ >> 2);
  }

 private:
  static constexpr std::uint64_t kSeed = 0xcbf29ce484222325ULL;
  static inline thread_local KinkProbe* active_ = nullptr;
  KinkProbe* previous_;
  std::uint64_t hash_ = kSeed;
};

template <typename T>
void probe_signs(std::span<const T> x) {
  auto* p = KinkProbe::active();
  if (!p) return;
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    word = (word << 1) | (x[i] > T(0));
    if (i % 64 == 63) p->mix(word), word = 0;
  }
  p->mix(word);
}

inline void probe_indices(std::span<const std::size_t> idx) {
  if (auto* p = KinkProbe::active())
    for (auto v : idx) p->mix(v);
}

}  // namespace tstcnn
