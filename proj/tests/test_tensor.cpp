#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "tstcnn/core/gradcheck.hpp"
#include "tstcnn/core/ops.hpp"
#include "tstcnn/core/random.hpp"
#include "tstcnn/core/tensor_io.hpp"
#include "tstcnn/nn/conv3d.hpp"
#include "tstcnn/nn/loss.hpp"
#include "tstcnn/nn/softmax.hpp"

using namespace tstcnn;

TEST(Tensor, FilledTensors) {
  auto a = Tensorf::filled(Shape{2, 2}, 0.0f);
  EXPECT_EQ(a.numel(), 4u);
  for (float v : a.values()) EXPECT_EQ(v, 0.0f);
  auto b = Tensorf::filled(Shape{1}, 3.5f);
  EXPECT_EQ(b[0], 3.5f);
  auto c = Tensorf::filled(Shape{3, 1, 2}, 1.0f);
  EXPECT_EQ(c.numel(), 6u);
  for (float v : c.values()) EXPECT_EQ(v, 1.0f);
}

TEST(Tensor, ShapeRejectsZeroAndOverflow) {
  EXPECT_THROW(Shape({2, 0}), ShapeError);
  EXPECT_THROW(Shape({std::size_t(1) << 40, std::size_t(1) << 40}), ShapeError);
  EXPECT_THROW(Tensorf(Shape{2}, std::vector<float>{1, 2, 3}), ShapeError);
}

TEST(Tensor, FlatIndexRoundTripsForRandomShapes) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::size_t> dims;
    std::size_t n = 1;
    const std::size_t rank = 1 + rng.below(5);
    for (std::size_t i = 0; i < rank; ++i) {
      std::size_t d = 1 + rng.below(7);
      if (n * d > 10000) d = 1;
      dims.push_back(d);
      n *= d;
    }
    Shape s(dims);
    const auto strides = s.strides();
    EXPECT_EQ(strides.back(), 1u);
    for (std::size_t flat = 0; flat < s.numel(); ++flat) {
      const auto c = s.coords_of(flat);
      std::size_t acc = 0;
      for (std::size_t i = 0; i < rank; ++i) acc += c[i] * strides[i];
      ASSERT_EQ(acc, flat);
      ASSERT_EQ(s.flat_index(c), flat);
    }
  }
}

TEST(Ops, Elementwise) {
  Tensorf a(Shape{2}, {1, 2}), b(Shape{2}, {3, 4});
  EXPECT_EQ(add(a, b), Tensorf(Shape{2}, {4, 6}));
  EXPECT_EQ(mul(Tensorf(Shape{2}, {2, 3}), Tensorf(Shape{2}, {4, 5})), Tensorf(Shape{2}, {8, 15}));
  Rng rng(1);
  auto x = uniform_tensor<float>(Shape{3, 4}, rng);
  EXPECT_EQ(mul(x, Tensorf::filled(x.shape(), 1.0f)), x);
}

TEST(Ops, ElementwiseShapeMismatchThrows) {
  EXPECT_THROW(add(Tensorf(Shape{2}), Tensorf(Shape{3})), ShapeError);
}

TEST(Ops, ElementwiseAddCommutes) {
  Rng rng(2);
  auto x = uniform_tensor<float>(Shape{5, 7}, rng), y = uniform_tensor<float>(Shape{5, 7}, rng);
  EXPECT_EQ(add(x, y), add(y, x));
}

TEST(Ops, ScalarBroadcast) {
  auto y = add_scalar(Tensorf(Shape{2}, {0.5f, 0.2f}), 1.0f);
  EXPECT_FLOAT_EQ(y[0], 1.5f);
  EXPECT_FLOAT_EQ(y[1], 1.2f);
  Rng rng(3);
  auto x = uniform_tensor<float>(Shape{4}, rng);
  EXPECT_EQ(scale(x, 1.0f), x);
  EXPECT_EQ(scale(Tensorf(Shape{2}, {2, -4}), 0.5f), Tensorf(Shape{2}, {1, -2}));
}

TEST(Ops, Matmul) {
  Tensorf eye(Shape{2, 2}, {1, 0, 0, 1});
  Rng rng(4);
  auto b = uniform_tensor<float>(Shape{2, 3}, rng);
  EXPECT_EQ(matmul(eye, b), b);
  EXPECT_EQ(matmul(Tensorf(Shape{1, 2}, {1, 2}), Tensorf(Shape{2, 1}, {3, 4})),
            Tensorf(Shape{1, 1}, {11}));
  auto p = uniform_tensor<float>(Shape{7, 5}, rng), q = uniform_tensor<float>(Shape{5, 3}, rng);
  EXPECT_LE(oracle::max_abs_diff(matmul(p, q), oracle::matmul(p, q)), 1e-6);
  EXPECT_THROW(matmul(p, p), ShapeError);
}

TEST(GradCheck, QuadraticAndLinear) {
  auto quad = [](const Tensord& x) {
    double v = 0;
    Tensord g(x.shape());
    for (std::size_t i = 0; i < x.numel(); ++i) {
      v += x[i] * x[i];
      g[i] = 2 * x[i];
    }
    return std::make_pair(v, g);
  };
  auto r = check_gradients(quad, Tensord(Shape{2}, {1, 2}), 1e-3);
  EXPECT_LE(r.max_relative_error, 1e-6);
  EXPECT_EQ(r.checked, 2u);

  auto quad_f = [](const Tensorf& x) {
    double v = 0;
    Tensorf g(x.shape());
    for (std::size_t i = 0; i < x.numel(); ++i) {
      v += double(x[i]) * double(x[i]);
      g[i] = 2 * x[i];
    }
    return std::make_pair(v, g);
  };
  EXPECT_LE(check_gradients(quad_f, Tensorf(Shape{2}, {1, 2}), 1e-3).max_relative_error, 1e-6);

  auto sum = [](const Tensord& x) {
    double v = 0;
    for (double e : x.values()) v += e;
    return std::make_pair(v, Tensord::filled(x.shape(), 1.0));
  };
  Rng rng(9);
  EXPECT_LE(check_gradients(sum, uniform_tensor<double>(Shape{6}, rng), 1e-3).max_relative_error, 1e-9);
}

TEST(GradCheck, DetectsWrongGradient) {
  auto wrong = [](const Tensord& x) {
    return std::make_pair(x[0] * x[0], Tensord(x.shape(), {x[0]}));
  };
  auto r = check_gradients(wrong, Tensord(Shape{1}, {3.0}), 1e-3);
  EXPECT_NEAR(r.max_relative_error, 0.5, 1e-6);
}

TEST(GradCheck, NonFiniteValueThrows) {
  auto bad = [](const Tensord& x) {
    return std::make_pair(std::log(x[0]), Tensord(x.shape(), {1.0 / x[0]}));
  };
  EXPECT_THROW(check_gradients(bad, Tensord(Shape{1}, {0.0005}), 1e-3), NumericError);
}

// cross-entropy(softmax(flatten(conv3d(x)))) on a 1x1x4x4x4 input.
TEST(GradCheck, CrossEntropySoftmaxConvComposite) {
  Rng rng(11);
  const nn::Conv3dGeometry g{{3, 3, 3}, {1, 1, 1}, {0, 0, 0}};
  auto w = uniform_tensor<double>(Shape{3, 1, 3, 3, 3}, rng, -0.5, 0.5);
  auto b = uniform_tensor<double>(Shape{3}, rng);
  auto x0 = uniform_tensor<double>(Shape{1, 1, 4, 4, 4}, rng);
  const std::vector<std::size_t> labels{5};
  auto f = [&](const Tensord& x) {
    auto y = nn::conv3d_forward(w, b, g, x);  // (1, 3, 2, 2, 2)
    auto logits = y.reshaped(Shape{1, 24});
    auto p = nn::softmax_forward(logits);
    const double loss = nn::cross_entropy(p, labels);
    auto gl = nn::softmax_cross_entropy_backward(p, labels).reshaped(y.shape());
    return std::make_pair(loss, nn::conv3d_backward(w, g, x, gl).grad_input);
  };
  EXPECT_LE(check_gradients(f, x0, 1e-3).max_relative_error, 1e-4);
}

TEST(TensorIo, Tt3dLayoutIsBitExact) {
  Tensorf t(Shape{2, 1}, {1.0f, -2.0f});
  auto bytes = io::encode_tt3d(t);
  const std::vector<std::uint8_t> expected{'T', 'T', '3', 'D', 1, 2, 2, 0, 0, 0, 1, 0, 0, 0,
                                           0x00, 0x00, 0x80, 0x3f, 0x00, 0x00, 0x00, 0xc0};
  EXPECT_EQ(bytes, expected);
  EXPECT_EQ(io::decode_tt3d(bytes), t);
}

TEST(TensorIo, RejectsCorruptFiles) {
  auto bytes = io::encode_tt3d(Tensorf::filled(Shape{3}, 1.0f));
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(io::decode_tt3d(bad_magic), ValidationError);
  auto bad_version = bytes;
  bad_version[4] = 2;
  EXPECT_THROW(io::decode_tt3d(bad_version), ValidationError);
  auto truncated = bytes;
  truncated.pop_back();
  EXPECT_THROW(io::decode_tt3d(truncated), ValidationError);
}

TEST(TensorIo, CheckpointRoundTripPreservesOrderAndValues) {
  Rng rng(12);
  io::NamedTensors entries{{"a.weight", uniform_tensor<float>(Shape{2, 3}, rng)},
                           {"b", uniform_tensor<float>(Shape{4}, rng)},
                           {"ünïcode", Tensorf::filled(Shape{1, 1, 1}, 7.0f)}};
  auto bytes = io::encode_checkpoint(entries);
  // Header: count then (len, name, offset) rows; the first blob starts right after.
  EXPECT_EQ(bytes[0], 3);
  std::size_t header = 4;
  for (auto& e : entries) header += 4 + e.first.size() + 8;
  EXPECT_EQ(bytes[header], 'T');
  auto back = io::decode_checkpoint(bytes);
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back[i].first, entries[i].first);
    EXPECT_EQ(back[i].second, entries[i].second);
  }
}
