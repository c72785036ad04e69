#pragma once

#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "tstcnn/model/tstcnn.hpp"
#include "tstcnn/training/data.hpp"

namespace tstcnn::training {

/// Rows are true classes, columns predictions.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes = 0) : k_(classes), counts_(classes * classes, 0) {}

  std::size_t classes() const { return k_; }
  void add(std::size_t truth, std::size_t predicted) {
    tstcnn::detail::require(truth < k_ && predicted < k_, "class index out of range");
    ++counts_[truth * k_ + predicted];
  }
  std::size_t operator()(std::size_t truth, std::size_t predicted) const { return counts_[truth * k_ + predicted]; }

  std::size_t total() const {
    std::size_t n = 0;
    for (auto c : counts_) n += c;
    return n;
  }
  std::size_t trace() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < k_; ++i) n += (*this)(i, i);
    return n;
  }
  std::size_t row_sum(std::size_t truth) const {
    std::size_t n = 0;
    for (std::size_t j = 0; j < k_; ++j) n += (*this)(truth, j);
    return n;
  }
  double accuracy() const { return total() ? double(trace()) / double(total()) : 0.0; }

  /// Row-normalized; empty rows stay zero.
  std::vector<double> normalized() const {
    std::vector<double> out(counts_.size(), 0.0);
    for (std::size_t i = 0; i < k_; ++i) {
      const auto r = row_sum(i);
      if (r)
        for (std::size_t j = 0; j < k_; ++j) out[i * k_ + j] = double((*this)(i, j)) / double(r);
    }
    return out;
  }

  std::string csv(const std::vector<std::string>& names, bool normalize) const {
    tstcnn::detail::require(names.size() == k_, "class names do not match the confusion matrix");
    const auto norm = normalized();
    std::ostringstream os;
    os << "true\\predicted";
    for (const auto& n : names) os << ",\"" << n << '"';
    os << '\n';
    for (std::size_t i = 0; i < k_; ++i) {
      os << '"' << names[i] << '"';
      for (std::size_t j = 0; j < k_; ++j) {
        os << ',';
        if (normalize) os << std::setprecision(6) << norm[i * k_ + j];
        else os << (*this)(i, j);
      }
      os << '\n';
    }
    return os.str();
  }

 private:
  std::size_t k_;
  std::vector<std::size_t> counts_;
};

struct EvalResult {
  ConfusionMatrix confusion;
  double accuracy = 0.0;
  // Late fusion only: the single streams, scored on the same windows.
  ConfusionMatrix rgb_confusion, flow_confusion;
};

template <typename T>
EvalResult evaluate(model::Tstcnn<T>& net, const std::vector<Sample>& samples, std::size_t batch_size = 8) {
  tstcnn::detail::require(!samples.empty(), "cannot evaluate an empty split");
  tstcnn::detail::require(batch_size >= 1, "batch size must be >= 1");
  const auto& cfg = net.config();
  const bool late = cfg.variant == model::Variant::late_fusion;
  EvalResult r{ConfusionMatrix(cfg.n_classes), 0.0, ConfusionMatrix(late ? cfg.n_classes : 0),
               ConfusionMatrix(late ? cfg.n_classes : 0)};
  for (std::size_t b = 0; b < samples.size(); b += batch_size) {
    std::vector<std::size_t> idx;
    for (std::size_t i = b; i < std::min(samples.size(), b + batch_size); ++i) idx.push_back(i);
    const auto batch = make_batch<T>(samples, idx, cfg);
    const auto scores = net.forward(batch, nn::Mode::eval);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      r.confusion.add(samples[idx[i]].label, scores.argmax(i));
      if (late) {
        r.rgb_confusion.add(samples[idx[i]].label, net.rgb_scores().argmax(i));
        r.flow_confusion.add(samples[idx[i]].label, net.flow_scores().argmax(i));
      }
    }
  }
  r.accuracy = r.confusion.accuracy();
  return r;
}

}  // namespace tstcnn::training
