#pragma once

#include <array>
#include <string>

#include "tstcnn/blocks/residual.hpp"
#include "tstcnn/nn/maxpool3d.hpp"
#include "tstcnn/nn/upsample.hpp"

namespace tstcnn::blocks {

inline constexpr std::size_t kAttentionMinExtent = 8;

/// Intermediate soft-mask tensors of the last forward, kept for inspection.
template <typename T>
struct MaskTrace {
  Tensor<T> x1, x2, x3;
  Tensor<T> y1, y2, y3;
  Tensor<T> mask;
};

/// 3D attention block:
///   I     = res_entry(x)
///   trunk = res(res(I))
///   x1 = bu1(res_pre(I)), x2 = bu2(x1), x3 = bu3(x2)     bu(.) = res(MaxPool(.))
///   y1 = td1(x3) + skip1(x2), y2 = td2(y1) + skip2(x1), y3 = td3(y2)   td(.) = Up(res(.))
///   mask = Sig(head2(head1(y3)))                           head(.) = conv1x1(ReLU(BN(.)))
///   out = res_exit(trunk * (1 + mask))
template <typename T>
class AttentionBlock3d {
 public:
  AttentionBlock3d() = default;
  explicit AttentionBlock3d(std::size_t channels)
      : channels_(channels),
        entry_(channels),
        trunk1_(channels),
        trunk2_(channels),
        pre_(channels),
        bu_{ResidualBlock3d<T>(channels), ResidualBlock3d<T>(channels), ResidualBlock3d<T>(channels)},
        td_{ResidualBlock3d<T>(channels), ResidualBlock3d<T>(channels), ResidualBlock3d<T>(channels)},
        skip_{ResidualBlock3d<T>(channels), ResidualBlock3d<T>(channels)},
        head1_(channels, channels, 1),
        head2_(channels, channels, 1),
        exit_(channels) {}

  void init(Rng& rng) {
    for (auto* r : residuals()) r->init(rng);
    head1_.init(rng);
    head2_.init(rng);
  }

  std::size_t channels() const { return channels_; }

  /// Test hook: replaces the mask by zeros so the block reduces to res_exit(trunk(I)).
  void set_force_zero_mask(bool on) { force_zero_mask_ = on; }

  static void check_extents(const Shape& s) {
    nn::require_rank5(s, "attention block");
    for (int a = 0; a < 3; ++a)
      tstcnn::detail::require_shape(s[2 + a] >= kAttentionMinExtent,
                                    "attention block needs every spatio-temporal extent >= 8, got " +
                                        s.str());
  }

  Tensor<T> forward(const Tensor<T>& x, Mode mode) {
    check_extents(x.shape());
    tstcnn::detail::require_shape(x.dim(1) == channels_,
                                  "attention block expects " + std::to_string(channels_) +
                                      " channels, got " + x.shape().str());
    const Tensor<T> input = entry_.forward(x, mode);
    trunk_ = trunk2_.forward(trunk1_.forward(input, mode), mode);
    if (force_zero_mask_) {
      trace_ = {};
      trace_.mask = Tensor<T>(input.shape());
    } else {
      mask_branch(input, mode);
    }
    const Tensor<T> gated = mul(trunk_, add_scalar(trace_.mask, T(1)));
    return exit_.forward(gated, mode);
  }

  Tensor<T> backward(const Tensor<T>& grad_out) {
    const Tensor<T> g_gated = exit_.backward(grad_out);
    const Tensor<T> g_trunk = mul(g_gated, add_scalar(trace_.mask, T(1)));
    Tensor<T> g_input = trunk1_.backward(trunk2_.backward(g_trunk));
    if (!force_zero_mask_) accumulate(g_input, mask_branch_backward(mul(g_gated, trunk_)));
    return entry_.backward(g_input);
  }

  /// Soft mask branch on the branch input I (the output of the entry block).
  Tensor<T> mask_branch(const Tensor<T>& input, Mode mode) {
    check_extents(input.shape());
    MaskTrace<T> t;
    t.x1 = bu_[0].forward(pool_[0].forward(pre_.forward(input, mode), mode), mode);
    t.x2 = bu_[1].forward(pool_[1].forward(t.x1, mode), mode);
    t.x3 = bu_[2].forward(pool_[2].forward(t.x2, mode), mode);
    t.y1 = add(up(td_[0].forward(t.x3, mode), t.x2.shape()), skip_[0].forward(t.x2, mode));
    t.y2 = add(up(td_[1].forward(t.y1, mode), t.x1.shape()), skip_[1].forward(t.x1, mode));
    t.y3 = up(td_[2].forward(t.y2, mode), input.shape());
    t.mask = nn::activation_forward(head2_.forward(head1_.forward(t.y3, mode), mode),
                                    nn::ActivationKind::sigmoid);
    shapes_ = {t.x3.shape(), t.y1.shape(), t.y2.shape()};
    trace_ = std::move(t);
    return trace_.mask;
  }

  const MaskTrace<T>& trace() const { return trace_; }
  const Tensor<T>& last_mask() const { return trace_.mask; }

  void register_parameters(nn::ParameterSet<T>& set, const std::string& prefix) {
    entry_.register_parameters(set, nn::join(prefix, "entry"));
    trunk1_.register_parameters(set, nn::join(prefix, "trunk.res1"));
    trunk2_.register_parameters(set, nn::join(prefix, "trunk.res2"));
    const std::string m = nn::join(prefix, "mask");
    pre_.register_parameters(set, nn::join(m, "pre"));
    for (int i = 0; i < 3; ++i) bu_[i].register_parameters(set, nn::join(m, "bu" + std::to_string(i + 1)));
    for (int i = 0; i < 3; ++i) td_[i].register_parameters(set, nn::join(m, "td" + std::to_string(i + 1)));
    for (int i = 0; i < 2; ++i)
      skip_[i].register_parameters(set, nn::join(m, "skip" + std::to_string(i + 1)));
    head1_.register_parameters(set, nn::join(m, "head1"), "bn", "conv");
    head2_.register_parameters(set, nn::join(m, "head2"), "bn", "conv");
    exit_.register_parameters(set, nn::join(prefix, "exit"));
  }

  ResidualBlock3d<T>& entry() { return entry_; }
  ResidualBlock3d<T>& trunk(int i) { return i == 0 ? trunk1_ : trunk2_; }
  ResidualBlock3d<T>& pre() { return pre_; }
  ResidualBlock3d<T>& bottom_up(int i) { return bu_[i]; }
  ResidualBlock3d<T>& top_down(int i) { return td_[i]; }
  ResidualBlock3d<T>& skip(int i) { return skip_[i]; }
  PreActConv<T>& head(int i) { return i == 0 ? head1_ : head2_; }
  ResidualBlock3d<T>& exit() { return exit_; }

 private:
  static Tensor<T> up(const Tensor<T>& x, const Shape& like) {
    return nn::trilinear_upsample(x, nn::Index3{like[2], like[3], like[4]});
  }

  Tensor<T> mask_branch_backward(const Tensor<T>& g_mask) {
    const Tensor<T> g_logits = nn::activation_backward(trace_.mask, g_mask, nn::ActivationKind::sigmoid);
    const Tensor<T> g_y3 = head1_.backward(head2_.backward(g_logits));
    // y3 = up(td3(y2))
    Tensor<T> g_y2 = td_[2].backward(nn::trilinear_upsample_backward(shapes_[2], g_y3));
    // y2 = up(td2(y1)) + skip2(x1)
    Tensor<T> g_x1 = skip_[1].backward(g_y2);
    Tensor<T> g_y1 = td_[1].backward(nn::trilinear_upsample_backward(shapes_[1], g_y2));
    // y1 = up(td1(x3)) + skip1(x2)
    Tensor<T> g_x2 = skip_[0].backward(g_y1);
    Tensor<T> g_x3 = td_[0].backward(nn::trilinear_upsample_backward(shapes_[0], g_y1));
    accumulate(g_x2, pool_[2].backward(bu_[2].backward(g_x3)));
    accumulate(g_x1, pool_[1].backward(bu_[1].backward(g_x2)));
    return pre_.backward(pool_[0].backward(bu_[0].backward(g_x1)));
  }

  std::array<ResidualBlock3d<T>*, 13> residuals() {
    return {&entry_, &trunk1_, &trunk2_, &pre_, &bu_[0], &bu_[1], &bu_[2],
            &td_[0], &td_[1], &td_[2], &skip_[0], &skip_[1], &exit_};
  }

  std::size_t channels_ = 0;
  ResidualBlock3d<T> entry_, trunk1_, trunk2_, pre_;
  std::array<ResidualBlock3d<T>, 3> bu_;
  std::array<ResidualBlock3d<T>, 3> td_;
  std::array<ResidualBlock3d<T>, 2> skip_;
  std::array<nn::MaxPool3d<T>, 3> pool_;
  PreActConv<T> head1_, head2_;
  ResidualBlock3d<T> exit_;

  bool force_zero_mask_ = false;
  Tensor<T> trunk_;
  MaskTrace<T> trace_;
  std::array<Shape, 3> shapes_;
};

}  // namespace tstcnn::blocks
