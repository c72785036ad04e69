#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tstcnn/core/random.hpp"
#include "tstcnn/dataset/annotation.hpp"

namespace tstcnn::dataset {

enum class Split { train = 0, val = 1, test = 2 };
inline constexpr std::array<Split, 3> kSplits{Split::train, Split::val, Split::test};

inline std::string to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "train";
}

inline Split parse_split(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  throw ValidationError("split must be train, val or test, got '" + s + "'");
}

using SplitFractions = std::array<double, 3>;
inline constexpr SplitFractions kDefaultFractions{0.7, 0.2, 0.1};

/// Largest-remainder apportionment of n items. Remainders that agree within 1e-9 are
/// treated as equal and resolved towards the earlier split, so 95 at 70/20/10 gives
/// 67/19/9 even though 0.7 and 0.1 are not exact in binary.
inline std::array<std::size_t, 3> apportion(std::size_t n, const SplitFractions& f) {
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> rem{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double ideal = double(n) * f[i];
    const double fl = std::floor(ideal + 1e-9);
    counts[i] = std::size_t(fl);
    rem[i] = ideal - fl;
    assigned += counts[i];
  }
  while (assigned < n) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < 3; ++i)
      if (rem[i] > rem[best] + 1e-9) best = i;
    ++counts[best];
    rem[best] = -1.0;
    ++assigned;
  }
  return counts;
}

struct SplitResult {
  std::map<std::string, Split> assignments;  // segment_key -> split
  std::vector<std::string> warnings;
};

/// Stratified, seeded split: per label (in lexicographic label order), segments are put
/// in key order, shuffled with a single seeded stream, and cut by largest remainder.
/// Labels with fewer segments than splits go entirely to train.
inline SplitResult split_dataset(const std::vector<StrokeSegment>& segments, const SplitFractions& fractions,
                                 std::uint64_t seed) {
  double total = 0.0;
  for (double f : fractions) {
    tstcnn::detail::require(f >= 0.0 && std::isfinite(f), "split fractions must be finite and non-negative");
    total += f;
  }
  tstcnn::detail::require(std::abs(total - 1.0) < 1e-9, "split fractions must sum to 1");

  std::map<std::string, std::vector<std::string>> by_label;
  for (const auto& s : segments) by_label[s.label].push_back(segment_key(s));

  SplitResult out;
  Rng rng(seed);
  for (auto& [label, keys] : by_label) {
    std::sort(keys.begin(), keys.end());
    tstcnn::detail::require(std::adjacent_find(keys.begin(), keys.end()) == keys.end(),
                            "duplicate segment key in class '" + label + "'");
    if (keys.size() < kSplits.size()) {
      out.warnings.push_back("class '" + label + "' has " + std::to_string(keys.size()) +
                             " segment(s); all assigned to train");
      for (const auto& k : keys) out.assignments[k] = Split::train;
      continue;
    }
    rng.shuffle(keys);
    const auto counts = apportion(keys.size(), fractions);
    std::size_t pos = 0;
    for (std::size_t s = 0; s < 3; ++s)
      for (std::size_t i = 0; i < counts[s]; ++i) out.assignments[keys[pos++]] = kSplits[s];
  }
  return out;
}

}  // namespace tstcnn::dataset
