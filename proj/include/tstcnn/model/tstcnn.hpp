#pragma once

#include <memory>
#include <string>
#include <vector>

#include "tstcnn/model/branch.hpp"
#include "tstcnn/nn/bilinear.hpp"
#include "tstcnn/nn/loss.hpp"
#include "tstcnn/nn/softmax.hpp"

namespace tstcnn::model {

template <typename T>
struct Batch {
  Tensor<T> rgb;   // (B, 3, T, H, W); empty for flow-only models
  Tensor<T> flow;  // (B, 2, T, H, W); empty for rgb-only models
};

/// Probabilities of shape [B, n_classes].
template <typename T>
struct ClassScores {
  Tensor<T> probabilities;

  std::size_t batch() const { return probabilities.dim(0); }
  std::size_t classes() const { return probabilities.dim(1); }
  std::size_t argmax(std::size_t row) const {
    std::size_t best = 0;
    for (std::size_t k = 1; k < classes(); ++k)
      if (probabilities[row * classes() + k] > probabilities[row * classes() + best]) best = k;
    return best;
  }
};

/// Arithmetic mean of two probability rows, renormalized to sum 1.
template <typename T>
ClassScores<T> late_fusion_score(const ClassScores<T>& a, const ClassScores<T>& b) {
  tstcnn::detail::require_shape(a.probabilities.shape() == b.probabilities.shape(),
                                "late fusion shape mismatch");
  const std::size_t B = a.batch(), K = a.classes();
  Tensor<T> out(a.probabilities.shape());
  for (std::size_t r = 0; r < B; ++r) {
    double total = 0.0;
    std::vector<double> m(K);
    for (std::size_t k = 0; k < K; ++k)
      total += m[k] = 0.5 * (double(a.probabilities[r * K + k]) + double(b.probabilities[r * K + k]));
    for (std::size_t k = 0; k < K; ++k) out[r * K + k] = T(m[k] / total);
  }
  return {std::move(out)};
}

template <typename T>
struct StepResult {
  double loss = 0.0;
  ClassScores<T> scores;
  Tensor<T> grad_rgb;   // filled only when input gradients are requested
  Tensor<T> grad_flow;
};

/// The four model variants over one or two STCNN branches:
///   rgb / flow    branch -> linear(fc -> K) -> softmax
///   twin          softmax(bilinear(branch_rgb, branch_flow))
///   late_fusion   mean of the rgb and flow single-stream probabilities
template <typename T>
class Tstcnn {
 public:
  explicit Tstcnn(ModelConfig config) : config_(std::move(config)) {
    config_.validate();
    if (config_.uses_rgb()) rgb_ = std::make_unique<StcnnBranch<T>>(config_, config_.rgb_channels);
    if (config_.uses_flow())
      flow_ = std::make_unique<StcnnBranch<T>>(config_, config_.flow_channels);
    if (config_.variant == Variant::twin) {
      fusion_ = std::make_unique<nn::BilinearFusion<T>>(config_.fc_size, config_.fc_size,
                                                        config_.n_classes);
    } else {
      if (rgb_) rgb_head_ = std::make_unique<nn::Linear<T>>(config_.fc_size, config_.n_classes);
      if (flow_) flow_head_ = std::make_unique<nn::Linear<T>>(config_.fc_size, config_.n_classes);
    }
  }

  const ModelConfig& config() const { return config_; }

  /// Deterministic initialization in parameter definition order.
  void init(std::uint64_t seed) {
    Rng rng(seed);
    if (rgb_) rgb_->init(rng);
    if (flow_) flow_->init(rng);
    if (fusion_) fusion_->init(rng);
    if (rgb_head_) rgb_head_->init(rng);
    if (flow_head_) flow_head_->init(rng);
  }

  ClassScores<T> forward(const Batch<T>& batch, Mode mode = Mode::eval) {
    check_batch(batch);
    switch (config_.variant) {
      case Variant::rgb: return single(*rgb_, *rgb_head_, batch.rgb, mode, rgb_scores_);
      case Variant::flow: return single(*flow_, *flow_head_, batch.flow, mode, flow_scores_);
      case Variant::twin: {
        Tensor<T> f1 = rgb_->forward(batch.rgb, mode);
        Tensor<T> f2 = flow_->forward(batch.flow, mode);
        return {nn::softmax_forward(fusion_->forward(f1, f2, mode))};
      }
      case Variant::late_fusion: {
        auto a = single(*rgb_, *rgb_head_, batch.rgb, mode, rgb_scores_);
        auto b = single(*flow_, *flow_head_, batch.flow, mode, flow_scores_);
        return late_fusion_score(a, b);
      }
    }
    throw ValidationError("unknown variant");
  }

  /// Train-mode forward, cross-entropy loss and backward; parameter gradients accumulate.
  /// Late fusion trains both streams on the sum of their individual losses.
  StepResult<T> forward_backward(const Batch<T>& batch, const std::vector<std::size_t>& labels,
                                 bool need_input_grad = false) {
    StepResult<T> r;
    r.scores = forward(batch, Mode::train);
    switch (config_.variant) {
      case Variant::rgb:
        r.loss = nn::cross_entropy(rgb_scores_.probabilities, labels);
        r.grad_rgb = single_backward(*rgb_, *rgb_head_, rgb_scores_, labels, need_input_grad);
        break;
      case Variant::flow:
        r.loss = nn::cross_entropy(flow_scores_.probabilities, labels);
        r.grad_flow = single_backward(*flow_, *flow_head_, flow_scores_, labels, need_input_grad);
        break;
      case Variant::twin: {
        r.loss = nn::cross_entropy(r.scores.probabilities, labels);
        auto [g1, g2] = fusion_->backward(
            nn::softmax_cross_entropy_backward(r.scores.probabilities, labels));
        r.grad_rgb = rgb_->backward(g1, need_input_grad);
        r.grad_flow = flow_->backward(g2, need_input_grad);
        break;
      }
      case Variant::late_fusion:
        r.loss = nn::cross_entropy(rgb_scores_.probabilities, labels) +
                 nn::cross_entropy(flow_scores_.probabilities, labels);
        r.grad_rgb = single_backward(*rgb_, *rgb_head_, rgb_scores_, labels, need_input_grad);
        r.grad_flow = single_backward(*flow_, *flow_head_, flow_scores_, labels, need_input_grad);
        break;
    }
    return r;
  }

  /// Scores of the individual streams from the last late-fusion or single-stream forward.
  const ClassScores<T>& rgb_scores() const { return rgb_scores_; }
  const ClassScores<T>& flow_scores() const { return flow_scores_; }

  nn::ParameterSet<T> parameters() {
    nn::ParameterSet<T> set;
    if (rgb_) rgb_->register_parameters(set, "rgb");
    if (flow_) flow_->register_parameters(set, "flow");
    if (fusion_) fusion_->register_parameters(set, "fusion");
    if (rgb_head_) rgb_head_->register_parameters(set, "rgb_head");
    if (flow_head_) flow_head_->register_parameters(set, "flow_head");
    return set;
  }

  StcnnBranch<T>* rgb_branch() { return rgb_.get(); }
  StcnnBranch<T>* flow_branch() { return flow_.get(); }
  nn::BilinearFusion<T>* fusion() { return fusion_.get(); }

  /// Applies the zero-mask test hook to every attention block.
  void set_force_zero_mask(bool on) {
    for (auto* b : {rgb_.get(), flow_.get()})
      if (b)
        for (int s = 0; s < 3; ++s)
          if (auto* a = b->attention(s)) a->set_force_zero_mask(on);
  }

 private:
  void check_batch(const Batch<T>& batch) const {
    if (config_.uses_rgb())
      tstcnn::detail::require_shape(!batch.rgb.empty() && batch.rgb.rank() == 5 &&
                                        batch.rgb.dim(1) == config_.rgb_channels,
                                    "model expects rgb input with " +
                                        std::to_string(config_.rgb_channels) + " channels");
    if (config_.uses_flow())
      tstcnn::detail::require_shape(!batch.flow.empty() && batch.flow.rank() == 5 &&
                                        batch.flow.dim(1) == config_.flow_channels,
                                    "model expects flow input with " +
                                        std::to_string(config_.flow_channels) + " channels");
    if (config_.uses_rgb() && config_.uses_flow()) {
      const auto& a = batch.rgb.shape();
      const auto& b = batch.flow.shape();
      tstcnn::detail::require_shape(a[0] == b[0] && a[2] == b[2] && a[3] == b[3] && a[4] == b[4],
                                    "rgb " + a.str() + " and flow " + b.str() +
                                        " windows differ in (B, T, H, W)");
    }
  }

  static ClassScores<T> single(StcnnBranch<T>& branch, nn::Linear<T>& head, const Tensor<T>& x,
                               Mode mode, ClassScores<T>& keep) {
    keep = {nn::softmax_forward(head.forward(branch.forward(x, mode), mode))};
    return keep;
  }

  static Tensor<T> single_backward(StcnnBranch<T>& branch, nn::Linear<T>& head,
                                   const ClassScores<T>& scores,
                                   const std::vector<std::size_t>& labels, bool need_input_grad) {
    return branch.backward(
        head.backward(nn::softmax_cross_entropy_backward(scores.probabilities, labels)),
        need_input_grad);
  }

  ModelConfig config_;
  std::unique_ptr<StcnnBranch<T>> rgb_, flow_;
  std::unique_ptr<nn::BilinearFusion<T>> fusion_;
  std::unique_ptr<nn::Linear<T>> rgb_head_, flow_head_;
  ClassScores<T> rgb_scores_, flow_scores_;
};

}  // namespace tstcnn::model
