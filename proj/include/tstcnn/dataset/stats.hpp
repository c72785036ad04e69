#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "tstcnn/dataset/split.hpp"

namespace tstcnn::dataset {

struct ClassStats {
  std::string label;
  std::array<std::size_t, 3> per_split{};  // indexed by Split
  std::size_t unassigned = 0;
  std::size_t count = 0;
  long min_length = 0;
  long max_length = 0;
  double mean_length = 0.0;
  double std_length = 0.0;  // population
};

struct DatasetStats {
  std::vector<ClassStats> classes;
  ClassStats total;
};

namespace detail {
inline void finish(ClassStats& c, const std::vector<long>& lengths) {
  c.count = lengths.size();
  if (lengths.empty()) return;
  c.min_length = *std::min_element(lengths.begin(), lengths.end());
  c.max_length = *std::max_element(lengths.begin(), lengths.end());
  double sum = 0.0;
  for (long l : lengths) sum += double(l);
  c.mean_length = sum / double(lengths.size());
  double ss = 0.0;
  for (long l : lengths) ss += (double(l) - c.mean_length) * (double(l) - c.mean_length);
  c.std_length = std::sqrt(ss / double(lengths.size()));
}
}  // namespace detail

/// Per-class table. Rows follow `class_order` (classes are listed even when empty);
/// labels not in `class_order` are appended in lexicographic order.
inline DatasetStats compute_stats(const std::vector<StrokeSegment>& segments,
                                  const std::map<std::string, Split>& splits = {},
                                  const std::vector<std::string>& class_order = {}) {
  std::map<std::string, std::vector<const StrokeSegment*>> by_label;
  for (const auto& s : segments) by_label[s.label].push_back(&s);
  std::vector<std::string> order = class_order;
  for (const auto& [label, _] : by_label)
    if (std::find(order.begin(), order.end(), label) == order.end()) order.push_back(label);

  DatasetStats out;
  out.total.label = "Total";
  std::vector<long> all;
  for (const auto& label : order) {
    ClassStats c;
    c.label = label;
    std::vector<long> lengths;
    for (const auto* s : by_label[label]) {
      lengths.push_back(s->length());
      auto it = splits.find(segment_key(*s));
      if (it == splits.end()) ++c.unassigned;
      else ++c.per_split[std::size_t(it->second)];
    }
    detail::finish(c, lengths);
    for (std::size_t i = 0; i < 3; ++i) out.total.per_split[i] += c.per_split[i];
    out.total.unassigned += c.unassigned;
    all.insert(all.end(), lengths.begin(), lengths.end());
    out.classes.push_back(c);
  }
  detail::finish(out.total, all);
  return out;
}

namespace detail {
inline std::string mean_pm_std(const ClassStats& c) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(1) << c.mean_length << " ± " << c.std_length;
  return os.str();
}
}  // namespace detail

inline std::string format_stats_text(const DatasetStats& st) {
  std::vector<std::array<std::string, 8>> rows;
  rows.push_back({"Class", "Train", "Val", "Test", "Total", "Min", "Max", "Mean ± Std"});
  auto add = [&](const ClassStats& c) {
    rows.push_back({c.label, std::to_string(c.per_split[0]), std::to_string(c.per_split[1]),
                    std::to_string(c.per_split[2]), std::to_string(c.count), std::to_string(c.min_length),
                    std::to_string(c.max_length), detail::mean_pm_std(c)});
  };
  for (const auto& c : st.classes) add(c);
  add(st.total);
  // "±" is two bytes in UTF-8 but one column on screen.
  auto width = [](const std::string& s) {
    std::size_t w = 0;
    for (unsigned char ch : s) w += (ch & 0xC0) != 0x80;
    return w;
  };
  std::array<std::size_t, 8> w{};
  for (const auto& r : rows)
    for (std::size_t i = 0; i < 8; ++i) w[i] = std::max(w[i], width(r[i]));
  std::ostringstream os;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (r == rows.size() - 1) {
      for (std::size_t i = 0; i < 8; ++i) os << std::string(w[i], '-') << (i + 1 < 8 ? "  " : "\n");
    }
    for (std::size_t i = 0; i < 8; ++i) {
      const std::string& cell = rows[r][i];
      const std::string pad(w[i] - width(cell), ' ');
      os << (i == 0 ? cell + pad : pad + cell) << (i + 1 < 8 ? "  " : "\n");
    }
  }
  return os.str();
}

inline std::string format_stats_csv(const DatasetStats& st) {
  std::ostringstream os;
  os << "class,train,val,test,unassigned,total,min,max,mean,std\n";
  auto add = [&](const ClassStats& c) {
    os << '"' << c.label << '"' << ',' << c.per_split[0] << ',' << c.per_split[1] << ',' << c.per_split[2] << ','
       << c.unassigned << ',' << c.count << ',' << c.min_length << ',' << c.max_length << ',' << std::setprecision(10)
       << c.mean_length << ',' << c.std_length << '\n';
  };
  for (const auto& c : st.classes) add(c);
  add(st.total);
  return os.str();
}

}  // namespace tstcnn::dataset
