// Acceptance run: one [PASS]/[FAIL] line per criterion, indented detail lines below it.
// Exit code is the number of failed criteria (0 when everything holds).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>
#include <string>
#include <vector>

#include "curation_fixture.hpp"
#include "grad_helpers.hpp"
#include "oracles.hpp"
#include "tstcnn/blocks/attention.hpp"
#include "tstcnn/blocks/residual.hpp"
#include "tstcnn/cli/app.hpp"
#include "tstcnn/dataset/pipeline.hpp"
#include "tstcnn/dataset/synthetic.hpp"
#include "tstcnn/flow/pipeline.hpp"
#include "tstcnn/model/tstcnn.hpp"
#include "tstcnn/nn/activation.hpp"
#include "tstcnn/nn/batchnorm3d.hpp"
#include "tstcnn/nn/bilinear.hpp"
#include "tstcnn/nn/conv3d.hpp"
#include "tstcnn/nn/linear.hpp"
#include "tstcnn/nn/loss.hpp"
#include "tstcnn/nn/maxpool3d.hpp"
#include "tstcnn/nn/softmax.hpp"
#include "tstcnn/nn/upsample.hpp"
#include "tstcnn/training/segment.hpp"
#include "tstcnn/training/trainer.hpp"

using namespace tstcnn;
using nn::Mode;
using testing_util::check_module;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;
using Tensorl = Tensor<long double>;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

/// Collects the verdict and supporting lines of one criterion.
struct Verdict {
  bool pass = true;
  std::vector<std::string> lines;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    lines.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  }
  void info(const std::string& what) { lines.push_back("info " + what); }
};

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / "tstcnn_acceptance" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// ---- 1: gradient suite --------------------------------------------------------

constexpr double kGradTol = 1e-4;
constexpr double kEps = 1e-3;
constexpr int kSeeds = 5;

template <typename F>
void grad_row(Verdict& v, const std::string& name, F&& one_seed, double min_coverage = 0.0) {
  const auto t0 = Clock::now();
  double worst = 0, coverage = 1;
  for (int seed = 0; seed < kSeeds; ++seed) {
    const GradCheckReport r = one_seed(std::uint64_t(seed));
    worst = std::max(worst, r.max_relative_error);
    coverage = std::min(coverage, r.coverage());
  }
  std::string line = fmt("%-22s max rel err %.3e over %d seeds (%.1fs)", name.c_str(), worst, kSeeds,
                         seconds_since(t0));
  if (min_coverage > 0) line += fmt(", min coverage %.2f", coverage);
  v.check(worst <= kGradTol && coverage >= min_coverage, line);
}

template <typename T>
nn::ParameterSet<T> params_of(auto& module) {
  nn::ParameterSet<T> set;
  module.register_parameters(set, "m");
  return set;
}

GradCheckReport attention_check(std::uint64_t seed, double eps) {
  Rng rng(seed);
  blocks::AttentionBlock3d<long double> a(4);
  a.init(rng);
  KinkProbe probe;
  return check_module<long double>([&](const Tensorl& x) { return a.forward(x, Mode::train); },
                                   [&](const Tensorl& g) { return a.backward(g); }, params_of<long double>(a),
                                   uniform_tensor<long double>(Shape{1, 4, 8, 8, 8}, rng), seed, eps);
}

/// Follows the worst eps = 1e-3 coordinate of the attention check through smaller steps.
/// Truncation error shrinks like eps^2; a wrong backward pass would leave a constant gap.
std::string attention_convergence(std::uint64_t seed) {
  Rng rng(seed);
  blocks::AttentionBlock3d<long double> a(4);
  a.init(rng);
  auto set = params_of<long double>(a);
  Tensorl x = uniform_tensor<long double>(Shape{1, 4, 8, 8, 8}, rng);
  set.zero_grad();
  const Tensorl y = a.forward(x, Mode::train);
  Rng rr(seed ^ 0x9e3779b97f4a7c15ULL);
  const Tensorl r = uniform_tensor<long double>(y.shape(), rr);
  const Tensorl gx = a.backward(r);
  auto value = [&] { return testing_util::projection(r, a.forward(x, Mode::train)); };
  KinkProbe probe;
  std::string name = "input";
  Tensorl* target = &x;
  const Tensorl* grad = &gx;
  GradCheckReport worst = check_gradients_in_place(value, x, gx, kEps);
  for (auto& p : set.params) {
    const auto rep = check_gradients_in_place(value, p.param->value, p.param->grad, kEps);
    if (rep.max_relative_error > worst.max_relative_error) {
      worst = rep;
      name = p.name;
      target = &p.param->value;
      grad = &p.param->grad;
    }
  }
  const std::size_t i = worst.worst_index;
  const long double saved = (*target)[i], analytic = (*grad)[i];
  std::string out = fmt("attention seed %llu worst coordinate %s[%zu], analytic %.6Lf:",
                        (unsigned long long)seed, name.c_str(), i, analytic);
  for (double eps : {1e-3, 1e-4, 1e-5}) {
    (*target)[i] = saved + eps;
    const long double plus = value();
    (*target)[i] = saved - eps;
    const long double minus = value();
    (*target)[i] = saved;
    const long double numeric = (plus - minus) / (2 * eps);
    out += fmt(" eps %.0e abs err %.2Le", eps, std::abs(numeric - analytic));
  }
  return out;
}

Verdict gradient_suite() {
  Verdict v;
  const auto t0 = Clock::now();
  grad_row(v, "conv3d", [](std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t s = 1 + seed % 2;
    nn::Conv3d<double> conv(2, 3, nn::Conv3dGeometry{{3, 3, 3}, {s, s, s}, {1, 1, 1}});
    conv.init(rng);
    return check_module<double>([&](const Tensord& x) { return conv.forward(x, Mode::train); },
                                [&](const Tensord& g) { return conv.backward(g); }, params_of<double>(conv),
                                uniform_tensor<double>(Shape{2, 2, 4, 3, 5}, rng), seed, kEps);
  });
  grad_row(v, "maxpool3d", [](std::uint64_t seed) {
    Rng rng(seed);
    nn::MaxPool3d<double> pool;
    return check_module<double>([&](const Tensord& x) { return pool.forward(x, Mode::train); },
                                [&](const Tensord& g) { return pool.backward(g); }, {},
                                uniform_tensor<double>(Shape{2, 2, 4, 5, 4}, rng), seed, kEps);
  });
  grad_row(v, "batchnorm3d", [](std::uint64_t seed) {
    Rng rng(seed);
    nn::BatchNorm3d<double> bn(3);
    for (std::size_t c = 0; c < 3; ++c) {
      bn.gamma().value[c] = rng.uniform(0.5, 1.5);
      bn.beta().value[c] = rng.uniform(-0.5, 0.5);
    }
    return check_module<double>([&](const Tensord& x) { return bn.forward(x, Mode::train); },
                                [&](const Tensord& g) { return bn.backward(g); }, params_of<double>(bn),
                                uniform_tensor<double>(Shape{2, 3, 2, 3, 3}, rng), seed, kEps);
  });
  for (auto kind : {nn::ActivationKind::relu, nn::ActivationKind::sigmoid})
    grad_row(v, kind == nn::ActivationKind::relu ? "relu" : "sigmoid", [kind](std::uint64_t seed) {
      Rng rng(seed);
      nn::Activation<double> act(kind);
      return check_module<double>([&](const Tensord& x) { return act.forward(x, Mode::train); },
                                  [&](const Tensord& g) { return act.backward(g); }, {},
                                  uniform_tensor<double>(Shape{3, 7}, rng, -4, 4), seed, kEps);
    });
  grad_row(v, "softmax", [](std::uint64_t seed) {
    Rng rng(seed);
    Tensord probs;
    return check_module<double>([&](const Tensord& z) { return probs = nn::softmax_forward(z); },
                                [&](const Tensord& g) { return nn::softmax_backward(probs, g); }, {},
                                uniform_tensor<double>(Shape{3, 5}, rng, -3, 3), seed, kEps);
  });
  grad_row(v, "softmax+cross-entropy", [](std::uint64_t seed) {
    Rng rng(seed);
    const std::vector<std::size_t> labels{seed % 4, 2, 0};
    auto f = [&](const Tensord& z) {
      auto p = nn::softmax_forward(z);
      return std::make_pair(nn::cross_entropy(p, labels), nn::softmax_cross_entropy_backward(p, labels));
    };
    return check_gradients(f, uniform_tensor<double>(Shape{3, 4}, rng, -2, 2), kEps);
  });
  grad_row(v, "trilinear upsample", [](std::uint64_t seed) {
    Rng rng(seed);
    auto x = uniform_tensor<double>(Shape{1, 2, 1, 2, 3}, rng);
    return check_module<double>([&](const Tensord& t) { return nn::trilinear_upsample(t, nn::Index3{3, 4, 7}); },
                                [&](const Tensord& g) { return nn::trilinear_upsample_backward(x.shape(), g); },
                                {}, x, seed, kEps);
  });
  grad_row(v, "linear", [](std::uint64_t seed) {
    Rng rng(seed);
    nn::Linear<double> fc(6, 4);
    fc.init(rng);
    return check_module<double>([&](const Tensord& x) { return fc.forward(x, Mode::train); },
                                [&](const Tensord& g) { return fc.backward(g); }, params_of<double>(fc),
                                uniform_tensor<double>(Shape{3, 6}, rng), seed, kEps);
  });
  grad_row(v, "bilinear fusion", [](std::uint64_t seed) {
    Rng rng(seed);
    nn::BilinearFusion<double> f(4, 3, 5);
    f.init(rng);
    const auto x2 = uniform_tensor<double>(Shape{2, 3}, rng);
    auto r = check_module<double>([&](const Tensord& x) { return f.forward(x, x2, Mode::train); },
                                  [&](const Tensord& g) { return f.backward(g).first; }, params_of<double>(f),
                                  uniform_tensor<double>(Shape{2, 4}, rng), seed, kEps);
    const auto x1 = uniform_tensor<double>(Shape{2, 4}, rng);
    r.merge(check_module<double>([&](const Tensord& x) { return f.forward(x1, x, Mode::train); },
                                 [&](const Tensord& g) { return f.backward(g).second; }, {},
                                 uniform_tensor<double>(Shape{2, 3}, rng), seed, kEps));
    return r;
  });
  grad_row(
      v, "residual block",
      [](std::uint64_t seed) {
        Rng rng(seed);
        blocks::ResidualBlock3d<long double> r(4);
        r.init(rng);
        KinkProbe probe;
        return check_module<long double>([&](const Tensorl& x) { return r.forward(x, Mode::train); },
                                         [&](const Tensorl& g) { return r.backward(g); }, params_of<long double>(r),
                                         uniform_tensor<long double>(Shape{2, 4, 3, 4, 3}, rng), seed, kEps);
      },
      0.5);
  grad_row(v, "attention block", [](std::uint64_t seed) { return attention_check(seed, kEps); }, 0.5);
  {
    const auto t1 = Clock::now();
    v.info(attention_convergence(1) + fmt(" (%.1fs, outside the timing budget)", seconds_since(t1)));
  }
  const double total = seconds_since(t0);
  v.check(total < 120.0, fmt("suite runtime %.1fs (< 120s)", total));
  return v;
}

// ---- 2: kernel oracles --------------------------------------------------------

Verdict kernel_oracles() {
  Verdict v;
  double conv = 0, bn = 0, tri = 0, sm = 0;
  bool pool_exact = true;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const std::size_t stride = 1 + seed % 2, pad = seed % 3, k = 1 + 2 * (seed % 2);
    const auto x = uniform_tensor<float>(Shape{2, 2, 1 + rng.below(6), 1 + rng.below(6), 1 + rng.below(6)}, rng);
    const auto w = uniform_tensor<float>(Shape{3, 2, k, k, k}, rng);
    const auto b = uniform_tensor<float>(Shape{3}, rng);
    bool fits = true;
    for (int a = 2; a < 5; ++a) fits = fits && x.dim(a) + 2 * pad >= k;
    if (fits)
      conv = std::max(conv, oracle::max_abs_diff(nn::conv3d_forward(w, b, nn::Conv3dGeometry{{k, k, k}, {stride, stride, stride}, {pad, pad, pad}}, x),
                                                 oracle::conv3d(x, w, b, long(stride), long(pad))));

    const auto px = uniform_tensor<float>(Shape{1, 2, 2 + rng.below(5), 2 + rng.below(5), 2 + rng.below(5)}, rng);
    pool_exact = pool_exact && nn::maxpool3d_forward(px).output == oracle::maxpool2(px);

    nn::BatchNorm3d<float> norm(3);
    std::vector<double> gamma(3), beta(3);
    for (std::size_t c = 0; c < 3; ++c) {
      norm.gamma().value[c] = float(rng.uniform(0.5, 2.0));
      norm.beta().value[c] = float(rng.uniform(-1, 1));
      gamma[c] = norm.gamma().value[c];
      beta[c] = norm.beta().value[c];
    }
    const auto bx = uniform_tensor<float>(Shape{2, 3, 3, 4, 5}, rng, -2, 3);
    bn = std::max(bn, oracle::max_abs_diff(norm.forward(bx, Mode::train), oracle::batchnorm(bx, gamma, beta, 1e-5)));

    const auto tx = uniform_tensor<float>(Shape{1, 2, 1 + rng.below(3), 1 + rng.below(3), 1 + rng.below(3)}, rng);
    const std::size_t D = tx.dim(2) + rng.below(4), H = tx.dim(3) + rng.below(4), W = tx.dim(4) + rng.below(4);
    tri = std::max(tri, oracle::max_abs_diff(nn::trilinear_upsample(tx, nn::Index3{D, H, W}), oracle::trilinear(tx, D, H, W)));

    const auto z = uniform_tensor<float>(Shape{4, 21}, rng, -5, 5);
    sm = std::max(sm, oracle::max_abs_diff(nn::softmax_forward(z), oracle::softmax(z)));
  }
  v.check(conv <= 1e-5, fmt("conv3d max abs diff %.2e (<= 1e-5)", conv));
  v.check(pool_exact, "maxpool3d bit-exact on 10 seeds");
  v.check(bn <= 1e-5, fmt("batchnorm3d max abs diff %.2e (<= 1e-5)", bn));
  v.check(tri <= 1e-5, fmt("trilinear max abs diff %.2e (<= 1e-5)", tri));
  v.check(sm <= 1e-5, fmt("softmax max abs diff %.2e (<= 1e-5)", sm));
  return v;
}

// ---- 3: architecture shape laws -----------------------------------------------

Verdict shape_laws() {
  Verdict v;
  Rng rng(0);
  {
    model::ModelConfig c;  // twin, 100x120x120, filters 30/60/80, 21 classes
    v.check(c.flatten_length() == 216000, fmt("flatten length %zu (= 80*12*15*15 = 216000)", c.flatten_length()));
    const auto t0 = Clock::now();
    model::Tstcnn<float> m(c);
    m.init(0);
    model::Batch<float> b;
    b.rgb = uniform_tensor<float>(Shape{1, 3, 100, 120, 120}, rng);
    b.flow = uniform_tensor<float>(Shape{1, 2, 100, 120, 120}, rng, -1, 1);
    const auto s = m.forward(b);
    double sum = 0;
    for (std::size_t k = 0; k < s.classes(); ++k) sum += s.probabilities[k];
    const Shape flat{1, 80, 12, 15, 15};
    v.check(m.rgb_branch()->last_flat_shape() == flat && m.flow_branch()->last_flat_shape() == flat,
            "rgb and flow branches end at " + flat.str());
    v.check(s.classes() == 21 && std::abs(sum - 1.0) <= 1e-6,
            fmt("default twin forward: %zu probabilities, sum - 1 = %.2e (%.1fs)", s.classes(), sum - 1.0,
                seconds_since(t0)));
  }
  {
    // One stream suffices: both streams share the branch code; this keeps peak memory down.
    model::ModelConfig c;
    c.variant = model::Variant::rgb;
    c.attention = true;
    const auto t0 = Clock::now();
    model::Tstcnn<float> m(c);
    m.init(1);
    model::Batch<float> b;
    b.rgb = uniform_tensor<float>(Shape{1, 3, 100, 120, 120}, rng);
    const auto s = m.forward(b);
    auto* br = m.rgb_branch();
    const auto ext = c.stage_extents();
    bool ok = true;
    std::string stages;
    for (int st = 0; st < 3; ++st) {
      auto* a = br->attention(st);
      if (!a) { ok = false; continue; }
      const auto& t = a->trace();
      const Shape want{1, c.filters[st], ext[st][0], ext[st][1], ext[st][2]};
      ok = ok && t.mask.shape() == want && t.y3.shape() == want;
      stages += " " + t.mask.shape().str();
    }
    double sum = 0;
    for (std::size_t k = 0; k < s.classes(); ++k) sum += s.probabilities[k];
    ok = ok && br->last_flat_shape() == Shape{1, 80, 12, 15, 15} && std::abs(sum - 1.0) <= 1e-6;
    v.check(ok, fmt("attention variant keeps stage shapes%s, flatten %s (%.1fs)", stages.c_str(),
                    br->last_flat_shape().str().c_str(), seconds_since(t0)));
  }
  return v;
}

// ---- 4: attention semantics ---------------------------------------------------

Verdict attention_semantics() {
  Verdict v;
  float lo = 1, hi = 0;
  bool open = true;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    blocks::AttentionBlock3d<float> a(4);
    a.init(rng);
    const double range = 1.0 + double(seed);  // up to +-20 to push the sigmoid
    a.forward(uniform_tensor<float>(Shape{1, 4, 8, 8, 8}, rng, -range, range), Mode::train);
    for (float m : a.trace().mask.values()) {
      open = open && m > 0.0f && m < 1.0f;
      lo = std::min(lo, m);
      hi = std::max(hi, m);
    }
  }
  v.check(open, fmt("mask in (0,1) on 20 inputs: min %.6g max %.6g", lo, hi));
  bool exact = true;
  for (std::uint64_t seed = 0; seed < 5; ++seed)
    for (Mode mode : {Mode::eval, Mode::train}) {
      Rng rng(seed);
      blocks::AttentionBlock3d<float> a(4);
      a.init(rng);
      a.set_force_zero_mask(true);
      const auto x = uniform_tensor<float>(Shape{2, 4, 8, 8, 8}, rng);
      const auto y = a.forward(x, mode);
      // Separate block with identical weights so the reference has its own batch-norm state.
      Rng rng2(seed);
      blocks::AttentionBlock3d<float> ref(4);
      ref.init(rng2);
      const auto expect = ref.exit().forward(
          ref.trunk(1).forward(ref.trunk(0).forward(ref.entry().forward(x, mode), mode), mode), mode);
      exact = exact && y == expect;
    }
  v.check(exact, "zero-mask hook equals exit(trunk(entry(x))) bit-exactly (5 seeds, eval and train)");
  return v;
}

// ---- 5: flow normalization ----------------------------------------------------

Verdict flow_normalization() {
  Verdict v;
  {
    const auto r = flow::normalize_normal(std::vector<float>{0, 1, 2, 3, 4});
    const double d = 2.0 + 3.0 * std::sqrt(2.0);  // mean + 3 std
    double err = 0;
    for (int i = 0; i < 5; ++i) err = std::max(err, std::abs(r.values[i] - i / d));
    const double hand[5] = {0, 0.1602, 0.3204, 0.4805, 0.6407};
    double err_hand = 0;
    for (int i = 0; i < 5; ++i) err_hand = std::max(err_hand, std::abs(r.values[i] - hand[i]));
    v.check(err <= 1e-4 && err_hand <= 1e-4,
            fmt("{0..4} -> divisor %.4f, max err %.1e vs formula, %.1e vs 4-digit hand values", d, err, err_hand));
  }
  {
    std::vector<float> spike(100, 0.0f);
    spike[42] = 100.0f;
    const auto r = flow::normalize_normal(spike);
    const double d = 1.0 + 3.0 * std::sqrt(99.0);
    v.check(std::abs(d - 30.85) <= 1e-2 && r.values[42] == 1.0f && r.values[0] == 0.0f,
            fmt("99 zeros + one 100 -> divisor %.2f, 100/%.2f = %.2f clamped to %g", d, d, 100 / d, r.values[42]));
  }
  {
    // Powers of two scale every float exactly, so the outputs must be bit-identical.
    // For general k the scaled input itself is rounded; equality is then up to float rounding.
    bool exact = true;
    double general = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Rng rng(seed);
      const auto f = uniform_tensor<float>(Shape{2, 4, 5, 5}, rng, -3, 3);
      for (auto kind : {flow::NormalizationKind::normal, flow::NormalizationKind::max}) {
        const auto base = flow::normalize_flow(f, {kind}).flow;
        for (float k : {0.125f, 0.5f, 2.0f, 64.0f, 1024.0f}) {
          Tensorf kf = f;
          for (auto& x : kf.values()) x *= k;
          exact = exact && flow::normalize_flow(kf, {kind}).flow == base;
        }
        for (float k : {0.3f, 3.7f, 17.0f}) {
          Tensorf kf = f;
          for (auto& x : kf.values()) x *= k;
          general = std::max(general, oracle::max_abs_diff(flow::normalize_flow(kf, {kind}).flow, base));
        }
      }
    }
    v.check(exact, "scale invariance bit-exact for k in {1/8, 1/2, 2, 64, 1024}, Normal and Max, 20 fields");
    v.info(fmt("non-power-of-two k in {0.3, 3.7, 17}: max abs diff %.2e (input rounding)", general));
  }
  {
    bool inside = true;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      Rng rng(seed);
      auto f = uniform_tensor<float>(Shape{2, 3, 5, 4}, rng, -10, 10);
      for (int i = 0; i < 5; ++i) f[rng.below(f.numel())] *= 50.0f;
      for (auto kind : {flow::NormalizationKind::normal, flow::NormalizationKind::max}) {
        const auto out = flow::normalize_flow(f, {kind});
        for (float x : out.flow.values()) inside = inside && x >= -1.0f && x <= 1.0f;
      }
    }
    v.check(inside, "all outputs in [-1, 1] on 100 random fields (Normal and Max)");
  }
  return v;
}

// ---- 6: curation --------------------------------------------------------------

Verdict curation() {
  using namespace dataset;
  using curation_fixture::ann;
  Verdict v;
  v.check(fuse_overlapping_annotations({ann(0, 100), ann(75, 175)}).size() == 2 &&
              fuse_overlapping_annotations({ann(0, 100), ann(74, 174)}).size() == 1 &&
              fuse_overlapping_annotations({ann(0, 100), ann(80, 180)}).size() == 2 &&
              fuse_overlapping_annotations({ann(0, 100), ann(70, 170)}).size() == 1,
          "25% rule: overlap 20/25 of 100 kept apart, 26/30 fused");
  CurationReport rep;
  const auto m = curate(curation_fixture::fixture_manifest(), {}, &rep);
  v.check(rep.annotations == 17 && rep.fused_segments == 15 && rep.merged_segments == 2 && rep.strokes == 14,
          fmt("fixture fusion: %zu annotations -> %zu segments (%zu merged), %zu strokes", rep.annotations,
              rep.fused_segments, rep.merged_segments, rep.strokes));
  v.check(rep.dropped_inconsistent == 1, fmt("consistency drops: %zu (expected 1)", rep.dropped_inconsistent));
  std::vector<std::pair<long, long>> neg;
  std::string listed;
  for (const auto& s : m.segments)
    if (s.source == SegmentSource::negative) {
      neg.emplace_back(s.start, s.end);
      listed += fmt(" [%ld,%ld)", s.start, s.end);
    }
  v.check(neg == curation_fixture::kExpectedNegatives,
          "negatives" + listed + " (100-frame gaps kept, 99-frame gap dropped)");
  const auto a = apportion(95, kDefaultFractions);
  std::vector<StrokeSegment> cls;
  for (long i = 0; i < 95; ++i) cls.push_back({"v", i * 300, i * 300 + 100, "Serve Forehand Topspin", SegmentSource::annotated, {}});
  const auto split = split_dataset(cls, kDefaultFractions, 0);
  const auto st = compute_stats(cls, split.assignments);
  v.check(a == std::array<std::size_t, 3>{67, 19, 9} && st.classes.at(0).per_split == a,
          fmt("95 samples at 70/20/10 -> %zu/%zu/%zu", a[0], a[1], a[2]));
  return v;
}

// ---- 7, 8: desk-scale learning and segmentation -------------------------------

model::ModelConfig tiny_config(model::Variant variant, bool attention, std::size_t classes) {
  model::ModelConfig c;
  c.variant = variant;
  c.attention = attention;
  c.window_frames = 16;
  c.height = c.width = 32;
  c.filters = {4, 8, 8};
  c.fc_size = 32;
  c.n_classes = classes;
  return c;
}

training::SgdConfig tiny_sgd(std::size_t epochs) {
  training::SgdConfig s;
  s.learning_rate = 0.003;
  s.batch_size = 8;
  s.max_epochs = epochs;
  return s;
}

constexpr std::size_t kLearnEpochs = 40;

Verdict learning_surrogate() {
  Verdict v;
  dataset::SyntheticSpec spec;
  spec.videos = 8;
  spec.strokes_per_video = 20;
  spec.seed = 1;
  const auto dir = scratch("learn");
  auto m = dataset::write_synthetic_dataset(dataset::generate_synthetic_dataset(spec), dir);
  dataset::CurationOptions co;
  co.fractions = {0.6, 0.4, 0.0};
  co.negatives.window_frames = 16;
  m = dataset::curate(m, co);
  const training::FlowOptions fo;
  training::VideoStore store(m, 32, 32, fo);
  const auto probe_cfg = tiny_config(model::Variant::twin, false, 2);
  const auto train = training::build_samples(m, dataset::Split::train, probe_cfg, store, fo).samples;
  const auto val = training::build_samples(m, dataset::Split::val, probe_cfg, store, fo).samples;
  std::array<std::size_t, 2> per_class{};
  for (const auto& s : train) ++per_class[s.label];
  for (const auto& s : val) ++per_class[s.label];
  v.info(fmt("%zu train / %zu held-out windows; per class %zu / %zu", train.size(), val.size(), per_class[0], per_class[1]));
  v.check(per_class[0] >= 40 && per_class[1] >= 40, "at least 40 windows per class");
  const auto t_all = Clock::now();
  for (bool attention : {false, true}) {
    const auto t0 = Clock::now();
    model::Tstcnn<float> net(tiny_config(model::Variant::twin, attention, 2));
    net.init(0);
    const auto state = training::train(net, train, val, tiny_sgd(kLearnEpochs));
    const double tr = training::evaluate(net, train, 8).accuracy, va = training::evaluate(net, val, 8).accuracy;
    v.check(tr >= 0.95 && va >= 0.90,
            fmt("twin%s: train %.3f (>= 0.95), held-out %.3f (>= 0.90), best epoch %zu of %zu (%.0fs)",
                attention ? " + attention" : "", tr, va, state.best_epoch, kLearnEpochs, seconds_since(t0)));
  }
  {
    const auto t0 = Clock::now();
    model::Tstcnn<float> net(tiny_config(model::Variant::late_fusion, false, 2));
    net.init(0);
    training::train(net, train, val, tiny_sgd(kLearnEpochs));
    const auto r = training::evaluate(net, val, 8);
    const double rgb = r.rgb_confusion.accuracy(), fl = r.flow_confusion.accuracy();
    v.info(fmt("late fusion held-out %.3f vs rgb stream %.3f, flow stream %.3f (%.0fs)%s", r.accuracy, rgb, fl,
               seconds_since(t0), r.accuracy >= std::max(rgb, fl) ? "" : " -- fusion below a single stream"));
  }
  v.info(fmt("training wall time %.0fs on %u hardware thread(s)", seconds_since(t_all),
             std::thread::hardware_concurrency()));
  return v;
}

Verdict segmentation_surrogate() {
  Verdict v;
  dataset::SyntheticSpec spec;
  spec.negative_class = true;
  spec.videos = 6;
  spec.strokes_per_video = 20;
  spec.gap_min = 24;
  spec.gap_max = 40;
  spec.seed = 5;
  const auto dir = scratch("segment");
  auto m = dataset::write_synthetic_dataset(dataset::generate_synthetic_dataset(spec), dir);
  dataset::CurationOptions co;
  co.fractions = {0.8, 0.2, 0.0};
  co.negatives.window_frames = 16;
  m = dataset::curate(m, co);
  const auto cfg = tiny_config(model::Variant::twin, false, 3);
  const training::FlowOptions fo;
  training::VideoStore store(m, 32, 32, fo);
  const auto train = training::build_samples(m, dataset::Split::train, cfg, store, fo).samples;
  const auto val = training::build_samples(m, dataset::Split::val, cfg, store, fo).samples;
  const auto t0 = Clock::now();
  model::Tstcnn<float> net(cfg);
  net.init(0);
  training::train(net, train, val, tiny_sgd(kLearnEpochs));
  v.info(fmt("3-class model (left, right, Non stroke): %zu train / %zu val windows, val acc %.3f (%.0fs)",
             train.size(), val.size(), training::evaluate(net, val, 8).accuracy, seconds_since(t0)));

  // A 1000-frame video: the patch rests except for one planted 200-frame stroke.
  const long gt0 = 430, gt1 = 630;
  const auto taxonomy = m.taxonomy();
  const dataset::StrokeSegment planted{"planted", gt0, gt1, "right", dataset::SegmentSource::annotated, {"right"}};
  Rng rng(99);
  const auto video = dataset::render_synthetic_video(spec, "planted", {planted}, 1000, rng);
  io::save_tensor(dir / "planted.tt3d", video.rgb);
  dataset::Manifest pm;
  pm.classes = m.classes;
  pm.videos = {{"planted", "planted.tt3d", 1000, "", ""}};
  pm.base_dir = dir;
  training::VideoStore pstore(pm, 32, 32, fo);
  training::VoteOptions vo;
  vo.window = 16;
  vo.stride = 4;
  const auto negative = taxonomy.negative_index();
  const auto r = training::vote_over_windows(net, pstore, "planted", vo, fo, negative);
  double best = 0;
  std::string found;
  for (const auto& s : r.segments)
    if (s.label != negative) {
      best = std::max(best, training::interval_iou(s.start, s.end, gt0, gt1));
      found += fmt(" [%ld,%ld)=%s", s.start, s.end, taxonomy.name(s.label).c_str());
    }
  v.check(best >= 0.5, fmt("planted [%ld,%ld): detected%s, IoU %.3f (>= 0.5)", gt0, gt1,
                           found.empty() ? " nothing" : found.c_str(), best));
  return v;
}

// ---- 9: reproducibility -------------------------------------------------------

int run_cli(std::vector<std::string> args, std::string* out = nullptr) {
  args.insert(args.begin(), "tstcnn");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o, e;
  const int code = cli::run(int(argv.size()), argv.data(), o, e);
  if (out) *out = o.str() + e.str();
  return code;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

Verdict reproducibility() {
  Verdict v;
  const auto dir = scratch("repro");
  dataset::SyntheticSpec spec;
  spec.videos = 3;
  spec.seed = 2;
  auto m = dataset::write_synthetic_dataset(dataset::generate_synthetic_dataset(spec), dir / "raw");
  dataset::CurationOptions co;
  co.negatives.window_frames = 16;
  m = dataset::curate(m, co);
  m.base_dir = dir / "raw";
  dataset::save_manifest(dir / "raw/manifest.json", m);
  std::string log;
  auto train = [&](const std::string& name) {
    return run_cli({"train", "--manifest", (dir / "raw/manifest.json").string(), "--out", (dir / name).string(),
                    "--window", "16", "--spatial", "32x32", "--filters", "4,8,8", "--fc-size", "16", "--lr",
                    "0.003", "--epochs", "3", "--batch", "4", "--seed", "11"},
                   &log);
  };
  const int a = train("run1"), b = train("run2");
  v.check(a == 0 && b == 0, fmt("two train runs exit %d and %d", a, b) + (a || b ? ": " + log : ""));
  const auto c1 = slurp(dir / "run1/model.tt3d"), c2 = slurp(dir / "run2/model.tt3d");
  v.check(!c1.empty() && c1 == c2, fmt("model.tt3d byte-identical (%zu bytes)", c1.size()));
  v.check(slurp(dir / "run1/train_log.csv") == slurp(dir / "run2/train_log.csv"), "training logs identical");
  return v;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "gradient suite", gradient_suite},
      {2, "kernel oracles", kernel_oracles},
      {3, "architecture shape laws", shape_laws},
      {4, "attention semantics", attention_semantics},
      {5, "flow normalization", flow_normalization},
      {6, "curation pipeline", curation},
      {7, "desk-scale learning", learning_surrogate},
      {8, "segmentation by window voting", segmentation_surrogate},
      {9, "reproducible training", reproducibility},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.check(false, std::string("exception: ") + e.what());
    }
    failed += !v.pass;
    std::cout << (v.pass ? "[PASS] " : "[FAIL] ") << c.id << " " << c.name << "\n";
    for (const auto& l : v.lines) std::cout << "         " << l << "\n";
    std::cout.flush();
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed")) << "\n";
  return failed;
}
