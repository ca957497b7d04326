#include <gtest/gtest.h>

#include <cmath>

#include "glpd/gradcheck.hpp"
#include "glpd/ops.hpp"
#include "glpd/selfcheck.hpp"
#include "helpers.hpp"

using namespace glpd;
using glpd::test::random_tensor;

TEST(Tensor, ShapeAndDataMustAgree) {
  EXPECT_THROW(Tensor({2, 3}, std::vector<double>(5)), ShapeError);
  Tensor t = Tensor::full({2, 2}, 1.5);
  EXPECT_EQ(t.size(), 4u);
  EXPECT_DOUBLE_EQ(t[3], 1.5);
}

TEST(Tape, BackwardRequiresScalarLoss) {
  Tensor x = Tensor::full({3}, 1.0, true);
  Tape tape;
  Tape::Scope scope(tape);
  Tensor y = affine(x, 2.0);
  EXPECT_THROW(backward(y, tape), ContractError);
}

TEST(Tape, SecondBackwardAccumulates) {
  Tensor x = Tensor::from({1.0, -2.0, 3.0}, {3});
  x.set_requires_grad(true);
  Tape tape;
  Tensor loss;
  {
    Tape::Scope scope(tape);
    loss = sum(mul(x, x));
  }
  backward(loss, tape);
  const auto g1 = test::values(Tensor({3}, {x.grad().begin(), x.grad().end()}));
  backward(loss, tape);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(x.grad()[i], 2.0 * g1[i]);
  EXPECT_DOUBLE_EQ(g1[1], -4.0);
}

TEST(Tape, PausedOpsAreNotRecorded) {
  Tensor x = Tensor::full({2}, 1.0, true);
  Tape tape;
  Tape::Scope scope(tape);
  Tensor y;
  {
    Tape::Pause pause;
    y = affine(x, 3.0);
  }
  EXPECT_FALSE(y.requires_grad());
  EXPECT_EQ(tape.size(), 0u);
}

TEST(Ops, MatmulMatchesTripleLoop) {
  std::mt19937_64 rng(1);
  for (int c = 0; c < 10; ++c) {
    const std::size_t m = 1 + rng() % 6, k = 1 + rng() % 6, n = 1 + rng() % 6;
    Tensor a = random_tensor(rng, {m, k}), b = random_tensor(rng, {k, n});
    Tensor y = matmul(a, b);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t q = 0; q < k; ++q) s += a[i * k + q] * b[q * n + j];
        EXPECT_NEAR(y[i * n + j], s, 1e-12);
      }
  }
  EXPECT_THROW(matmul(Tensor::zeros({2, 3}), Tensor::zeros({2, 3})), ShapeError);
}

TEST(Ops, Conv2dMatchesSixLoopOracle) {
  std::mt19937_64 rng(2);
  for (int c = 0; c < 10; ++c) {
    const std::size_t ci = 1 + rng() % 3, co = 1 + rng() % 3, k = (rng() % 2) * 2 + 1;
    const int stride = 1 + static_cast<int>(rng() % 2), pad = static_cast<int>(rng() % (k / 2 + 1));
    const std::size_t h = k + rng() % 5, w = k + rng() % 5;
    Tensor x = random_tensor(rng, {ci, h, w}), wt = random_tensor(rng, {co, ci, k, k}), b = random_tensor(rng, {co});
    Tensor y = conv2d(x, wt, b, stride, pad);
    const std::size_t oh = (h + 2 * pad - k) / stride + 1, ow = (w + 2 * pad - k) / stride + 1;
    ASSERT_EQ(y.shape(), (Shape{co, oh, ow}));
    for (std::size_t o = 0; o < co; ++o)
      for (std::size_t oy = 0; oy < oh; ++oy)
        for (std::size_t ox = 0; ox < ow; ++ox) {
          double s = b[o];
          for (std::size_t i = 0; i < ci; ++i)
            for (std::size_t ky = 0; ky < k; ++ky)
              for (std::size_t kx = 0; kx < k; ++kx) {
                const long iy = static_cast<long>(oy * stride + ky) - pad;
                const long ix = static_cast<long>(ox * stride + kx) - pad;
                if (iy < 0 || ix < 0 || iy >= static_cast<long>(h) || ix >= static_cast<long>(w)) continue;
                s += wt[((o * ci + i) * k + ky) * k + kx] * x[(i * h + iy) * w + ix];
              }
          EXPECT_NEAR(y[(o * oh + oy) * ow + ox], s, 1e-12);
        }
  }
}

TEST(Ops, Conv2dRejectsBadKernels) {
  EXPECT_THROW(conv2d(Tensor::zeros({1, 4, 4}), Tensor::zeros({1, 1, 2, 2}), std::nullopt, 1, 0), ShapeError);
  EXPECT_THROW(conv2d(Tensor::zeros({2, 4, 4}), Tensor::zeros({1, 1, 3, 3}), std::nullopt, 1, 1), ShapeError);
  EXPECT_THROW(conv2d(Tensor::zeros({1, 2, 2}), Tensor::zeros({1, 1, 5, 5}), std::nullopt, 1, 0), ShapeError);
}

TEST(Ops, PixelShuffleFollowsIndexMap) {
  std::mt19937_64 rng(3);
  const int r = 2;
  Tensor x = random_tensor(rng, {8, 3, 2});
  Tensor y = pixel_shuffle(x, r);
  ASSERT_EQ(y.shape(), (Shape{2, 6, 4}));
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t yy = 0; yy < 3; ++yy)
      for (std::size_t xx = 0; xx < 2; ++xx)
        for (std::size_t i = 0; i < 2; ++i)
          for (std::size_t j = 0; j < 2; ++j)
            EXPECT_EQ(y[(c * 6 + yy * 2 + i) * 4 + xx * 2 + j], x[((c * 4 + i * 2 + j) * 3 + yy) * 2 + xx]);
  EXPECT_EQ(test::values(pixel_unshuffle(y, r)), test::values(x));
  EXPECT_THROW(pixel_shuffle(Tensor::zeros({3, 2, 2}), 2), ShapeError);
}

TEST(Ops, GridSampleMatchesScalarBilinear) {
  std::mt19937_64 rng(4);
  Tensor img = random_tensor(rng, {2, 4, 5});
  const std::vector<double> pts = {0.0, 0.0, 1.25, 2.5, -0.75, 1.0, 4.6, -0.3, 2.0, 3.9};
  Tensor coords({5, 2}, pts);
  Tensor y = grid_sample_bilinear(img, coords, Border::wrap, Border::clamp);
  auto at = [&](std::size_t c, long yy, long xx) {
    xx = ((xx % 5) + 5) % 5;
    yy = std::clamp(yy, 0L, 3L);
    return img[(c * 4 + static_cast<std::size_t>(yy)) * 5 + static_cast<std::size_t>(xx)];
  };
  for (std::size_t n = 0; n < 5; ++n) {
    const double px = pts[2 * n], py = std::clamp(pts[2 * n + 1], 0.0, 3.0);
    const long x0 = static_cast<long>(std::floor(px)), y0 = static_cast<long>(std::floor(py));
    const double ax = px - x0, ay = py - y0;
    for (std::size_t c = 0; c < 2; ++c) {
      const double ref = (1 - ax) * (1 - ay) * at(c, y0, x0) + ax * (1 - ay) * at(c, y0, x0 + 1) +
                         (1 - ax) * ay * at(c, y0 + 1, x0) + ax * ay * at(c, y0 + 1, x0 + 1);
      EXPECT_NEAR(y[c * 5 + n], ref, 1e-12) << "point " << n;
    }
  }
}

TEST(Ops, SoftmaxRowsSumToOne) {
  std::mt19937_64 rng(5);
  Tensor y = softmax_lastdim(random_tensor(rng, {3, 7}, -50.0, 50.0));
  for (std::size_t i = 0; i < 3; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < 7; ++j) s += y[i * 7 + j];
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(Ops, GeluUsesTanhApproximation) {
  for (double x : {-2.0, -0.5, 0.0, 0.7, 3.0}) {
    const double ref = 0.5 * x * (1.0 + std::tanh(std::sqrt(2.0 / M_PI) * (x + 0.044715 * x * x * x)));
    EXPECT_NEAR(gelu_scalar(x), ref, 1e-15);
  }
}

TEST(Ops, LayerNormNormalizesRows) {
  std::mt19937_64 rng(6);
  Tensor y = layer_norm(random_tensor(rng, {2, 16}, -3, 5), Tensor::full({16}, 1.0), Tensor::zeros({16}), 1e-12);
  for (std::size_t i = 0; i < 2; ++i) {
    double m = 0, v = 0;
    for (std::size_t j = 0; j < 16; ++j) m += y[i * 16 + j];
    m /= 16;
    for (std::size_t j = 0; j < 16; ++j) v += (y[i * 16 + j] - m) * (y[i * 16 + j] - m);
    EXPECT_NEAR(m, 0.0, 1e-12);
    EXPECT_NEAR(v / 16, 1.0, 1e-9);
  }
}

TEST(Ops, UpsampleOfConstantIsConstant) {
  Tensor y = upsample_bilinear(Tensor::full({2, 3, 3}, 0.25), 4);
  ASSERT_EQ(y.shape(), (Shape{2, 12, 12}));
  for (double v : y.data()) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(Ops, ConcatAndSliceInvert) {
  std::mt19937_64 rng(7);
  Tensor a = random_tensor(rng, {2, 3, 4}), b = random_tensor(rng, {2, 5, 4});
  Tensor c = concat({a, b}, 1);
  EXPECT_EQ(test::values(slice(c, 1, 0, 3)), test::values(a));
  EXPECT_EQ(test::values(slice(c, 1, 3, 5)), test::values(b));
  EXPECT_THROW(concat({a, Tensor::zeros({3, 3, 4})}, 1), ShapeError);
}

TEST(GradCheck, EveryPrimitiveTenCases) {
  for (const auto& c : primitive_gradient_checks(10, 99)) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
}

TEST(GradCheck, DetectsAWrongGradient) {
  // A function whose taped gradient is deliberately inconsistent with its value.
  Tensor x = Tensor::from({0.3, -0.2}, {2});
  auto f = [&] {
    Tensor y = sum(mul(x, x));
    Tensor cut = y.detach();  // value of x² but no gradient path
    return add(cut, sum(x));
  };
  EXPECT_FALSE(gradient_check(f, x).passed(1e-6));
}

TEST(GradCheck, ScaledGradientIsCaught) {
  // Negative control: an op whose backward is 1.1× the true derivative.
  Tensor x = Tensor::from({0.4, -0.7, 1.3}, {3});
  auto scaled_square_sum = [&] {
    Tensor y = Tensor::scalar(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    Tape::record({x}, y, [x, y](GradStore& gs) {
      const double g = gs.get(y)[0];
      auto gx = gs.acc(x);
      for (std::size_t i = 0; i < 3; ++i) gx[i] += 1.1 * 2.0 * x[i] * g;
    });
    return y;
  };
  EXPECT_GT(gradient_check(scaled_square_sum, x).max_rel_error, 1e-2);
  EXPECT_LT(gradient_check([&] { return sum(mul(x, x)); }, x).max_rel_error, 1e-8);
}

TEST(Tape, KnownGradientIdentities) {
  std::mt19937_64 rng(8);
  Tensor a = random_tensor(rng, {3, 4}), b = random_tensor(rng, {4, 2});
  a.set_requires_grad(true);
  Tape tape;
  {
    Tape::Scope scope(tape);
    backward(sum(matmul(a, b)), tape);
  }
  // d/dA Σ(A·B) = ones·Bᵀ: row i of the gradient is the row sums of B.
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(a.grad()[i * 4 + k], b[k * 2] + b[k * 2 + 1], 1e-15);
}

TEST(Ops, ShuffleRoundTripIsExact) {
  std::mt19937_64 rng(9);
  for (int r : {1, 2, 4}) {
    const std::size_t rr = static_cast<std::size_t>(r * r);
    const Tensor x = random_tensor(rng, {2 * rr, 3, 5});
    EXPECT_EQ(test::values(pixel_unshuffle(pixel_shuffle(x, r), r)), test::values(x));
  }
}
