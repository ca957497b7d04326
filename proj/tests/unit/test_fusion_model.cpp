#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "glpd/fusion.hpp"
#include "glpd/gradcheck.hpp"
#include "glpd/loss.hpp"
#include "glpd/model.hpp"
#include "glpd/ops.hpp"
#include "helpers.hpp"

using namespace glpd;
using glpd::test::random_tensor;

namespace {

// Same-padded 3×3 convolution over a C×H×W map, scalar loops.
std::vector<double> conv3(const std::vector<double>& x, const Tensor& w, const Tensor& b, std::size_t c,
                          std::size_t h, std::size_t wd) {
  std::vector<double> y(c * h * wd);
  for (std::size_t o = 0; o < c; ++o)
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < wd; ++j) {
        double s = b[o];
        for (std::size_t q = 0; q < c; ++q)
          for (int di = -1; di <= 1; ++di)
            for (int dj = -1; dj <= 1; ++dj) {
              const long ii = long(i) + di, jj = long(j) + dj;
              if (ii < 0 || jj < 0 || ii >= long(h) || jj >= long(wd)) continue;
              s += w[((o * c + q) * 3 + std::size_t(di + 1)) * 3 + std::size_t(dj + 1)] * x[(q * h + ii) * wd + jj];
            }
        y[(o * h + i) * wd + j] = s;
      }
  return y;
}

FusionLevelParams random_gate(std::mt19937_64& rng, std::size_t c) {
  FusionLevelParams p;
  p.gate_a = {random_tensor(rng, {c, c, 3, 3}, -0.5, 0.5), random_tensor(rng, {c}, -0.5, 0.5)};
  p.gate_b = {random_tensor(rng, {c, c, 3, 3}, -0.5, 0.5), random_tensor(rng, {c}, -0.5, 0.5)};
  return p;
}

}  // namespace

TEST(Fusion, MatchesScalarOracle) {
  std::mt19937_64 rng(31);
  for (int n = 0; n < 20; ++n) {
    const std::size_t c = 1 + rng() % 3, h = 1 + rng() % 5, w = 1 + rng() % 5;
    const Tensor fg = random_tensor(rng, {c, h, w}), fl = random_tensor(rng, {c, h, w});
    const FusionLevelParams p = random_gate(rng, c);
    const Tensor out = gated_fuse(fg, fl, p, FusionMode::gated);
    std::vector<double> s(c * h * w);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = fg[i] + fl[i];
    const auto logits = conv3(conv3(s, p.gate_a.weight, *p.gate_a.bias, c, h, w), p.gate_b.weight, *p.gate_b.bias, c, h, w);
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double g = 1.0 / (1.0 + std::exp(-logits[i]));
      EXPECT_NEAR(out[i], fg[i] * g + fl[i] * (1.0 - g), 1e-12);
    }
  }
}

TEST(Fusion, ConvexCombinationIdentity) {
  std::mt19937_64 rng(32);
  const Tensor f = random_tensor(rng, {3, 4, 4});
  const Tensor out = gated_fuse(f, f, random_gate(rng, 3), FusionMode::gated);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(out[i], f[i], 1e-12);
}

TEST(Fusion, ZeroLogitsAverageInputs) {
  const ModelConfig cfg = ModelConfig::tiny();
  ParameterSet set;
  ParamInit init(1);
  const FusionParams fp = FusionParams::create(cfg, init, set);
  std::mt19937_64 rng(33);
  const Tensor fg = random_tensor(rng, {16, 4, 4}), fl = random_tensor(rng, {16, 4, 4});
  const Tensor out = gated_fuse(fg, fl, fp.levels[0], FusionMode::gated);
  for (std::size_t i = 0; i < fg.size(); ++i) EXPECT_NEAR(out[i], 0.5 * (fg[i] + fl[i]), 1e-15);
}

TEST(Fusion, OutputBetweenInputs) {
  std::mt19937_64 rng(34);
  const Tensor fg = random_tensor(rng, {2, 5, 3}), fl = random_tensor(rng, {2, 5, 3});
  const Tensor out = gated_fuse(fg, fl, random_gate(rng, 2), FusionMode::gated);
  for (std::size_t i = 0; i < fg.size(); ++i) {
    EXPECT_GE(out[i], std::min(fg[i], fl[i]) - 1e-12);
    EXPECT_LE(out[i], std::max(fg[i], fl[i]) + 1e-12);
  }
}

TEST(Fusion, ShapeMismatchThrows) {
  std::mt19937_64 rng(35);
  EXPECT_THROW(gated_fuse(Tensor::zeros({2, 3, 3}), Tensor::zeros({2, 3, 4}), random_gate(rng, 2), FusionMode::gated),
               ShapeError);
}

TEST(Model, ForwardShapeAndNonNegative) {
  const ModelConfig cfg = ModelConfig::tiny();
  std::mt19937_64 rng(36);
  Tape::Pause pause;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const GLPanoDepth model(cfg, seed);
    const Tensor pano = random_tensor(rng, {3, 64, 128}, 0.0, 1.0);
    const Tensor d = model.forward(pano).depth;
    ASSERT_EQ(d.shape(), (Shape{1, 64, 128}));
    for (double v : d.data()) {
      EXPECT_TRUE(std::isfinite(v));
      EXPECT_GE(v, 0.0);
    }
  }
  EXPECT_THROW(GLPanoDepth(cfg, 0).forward(Tensor::zeros({3, 32, 64})), ShapeError);
}

TEST(Model, DeterministicForSeed) {
  const ModelConfig cfg = ModelConfig::tiny();
  GLPanoDepth a(cfg, 9), b(cfg, 9);
  std::mt19937_64 rng(37);
  const Tensor pano = random_tensor(rng, {3, 64, 128}, 0.0, 1.0);
  Tape::Pause pause;
  EXPECT_EQ(test::values(a.forward(pano).depth), test::values(b.forward(pano).depth));
}

TEST(Model, ConcatChangesOnlyFusionBlock) {
  ModelConfig g = ModelConfig::tiny(), c = ModelConfig::tiny();
  c.fusion_mode = FusionMode::concat;
  GLPanoDepth mg(g, 1), mc(c, 1);
  std::map<std::string, Shape> sg, sc;
  for (const auto& [n, t] : mg.params()) sg[n] = t.shape();
  for (const auto& [n, t] : mc.params()) sc[n] = t.shape();
  for (const auto& [n, s] : sg) {
    if (n.rfind("fusion.", 0) == 0) {
      EXPECT_EQ(sc.count(n), 0u) << n;
    } else {
      ASSERT_EQ(sc.count(n), 1u) << n;
      EXPECT_EQ(sc[n], s) << n;
    }
  }
  for (const auto& [n, s] : sc) {
    if (n.rfind("fusion.", 0) != 0) {
      EXPECT_EQ(sg.count(n), 1u) << n;
    }
  }
  std::mt19937_64 rng(38);
  const Tensor pano = random_tensor(rng, {3, 64, 128}, 0.0, 1.0);
  Tape::Pause pause;
  EXPECT_EQ(mc.forward(pano).depth.shape(), (Shape{1, 64, 128}));
}

TEST(Model, EveryParameterReceivesGradient) {
  GLPanoDepth model(ModelConfig::tiny(), 3);
  randomize_parameters(model.params(), 4);
  std::mt19937_64 rng(39);
  const Tensor pano = random_tensor(rng, {3, 64, 128}, 0.0, 1.0);
  const Tensor gt = random_tensor(rng, {1, 64, 128}, 0.5, 5.0);
  const ValidityMask mask = validity_mask(gt);
  Tape tape;
  {
    Tape::Scope scope(tape);
    backward(berhu_loss(model.forward(pano).depth, gt, mask), tape);
  }
  for (const auto& [name, t] : model.params()) {
    ASSERT_TRUE(t.has_grad()) << name;
    double norm = 0.0;
    for (double g : t.grad()) norm += g * g;
    EXPECT_GT(norm, 0.0) << name;
  }
}
