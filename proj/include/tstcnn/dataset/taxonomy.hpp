#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "tstcnn/core/error.hpp"

namespace tstcnn::dataset {

inline const std::string kNonStroke = "Non stroke";

enum class SuperClass { forehand, backhand, none };

/// The 20 TTStroke-21 stroke classes followed by the negative class.
inline const std::vector<std::string>& ttstroke21_classes() {
  static const std::vector<std::string> names{
      "Def. Backhand Backspin",  "Def. Backhand Block",     "Def. Backhand Push",
      "Def. Forehand Backspin",  "Def. Forehand Block",     "Def. Forehand Push",
      "Off. Backhand Flip",      "Off. Backhand Hit",       "Off. Backhand Loop",
      "Off. Forehand Flip",      "Off. Forehand Hit",       "Off. Forehand Loop",
      "Serve Backhand Backspin", "Serve Backhand Loop",     "Serve Backhand Sidespin",
      "Serve Backhand Topspin",  "Serve Forehand Backspin", "Serve Forehand Loop",
      "Serve Forehand Sidespin", "Serve Forehand Topspin",  kNonStroke};
  return names;
}

inline SuperClass super_class(const std::string& name) {
  if (name.find("Forehand") != std::string::npos) return SuperClass::forehand;
  if (name.find("Backhand") != std::string::npos) return SuperClass::backhand;
  return SuperClass::none;
}

/// Ordered class list; the position of a name is its label index.
class ClassTaxonomy {
 public:
  ClassTaxonomy() : names_(ttstroke21_classes()) {}
  explicit ClassTaxonomy(std::vector<std::string> names) : names_(std::move(names)) {
    detail::require(names_.size() >= 2, "a taxonomy needs at least two classes");
    auto sorted = names_;
    std::sort(sorted.begin(), sorted.end());
    detail::require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(),
                    "duplicate class names in taxonomy");
  }

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  bool contains(const std::string& n) const { return std::find(names_.begin(), names_.end(), n) != names_.end(); }

  std::size_t index_of(const std::string& n) const {
    auto it = std::find(names_.begin(), names_.end(), n);
    if (it == names_.end()) throw ValidationError("label '" + n + "' is not in the taxonomy");
    return std::size_t(it - names_.begin());
  }

  /// Index of the negative class, or size() when the taxonomy has none.
  std::size_t negative_index() const {
    auto it = std::find(names_.begin(), names_.end(), kNonStroke);
    return std::size_t(it - names_.begin());
  }

 private:
  std::vector<std::string> names_;
};

}  // namespace tstcnn::dataset
