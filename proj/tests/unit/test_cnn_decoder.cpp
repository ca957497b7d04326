#include <gtest/gtest.h>

#include <random>

#include "glpd/cnn.hpp"
#include "glpd/cvit.hpp"
#include "glpd/fusion.hpp"
#include "glpd/ops.hpp"
#include "helpers.hpp"

using namespace glpd;
using glpd::test::random_tensor;
using glpd::test::values;

namespace {

ModelConfig narrow(int h) {
  ModelConfig c = ModelConfig::tiny();
  c.height = h;
  c.width = 2 * h;
  c.dim = 16;
  c.heads = 2;
  c.level_channels = {4, 4, 8, 8};
  return c;
}

double grad_norm(const Tensor& t) {
  double s = 0.0;
  if (t.has_grad()) {
    for (double g : t.grad()) s += g * g;
  }
  return s;
}

}  // namespace

TEST(Cnn, ResidualBlockWithZeroSecondConvIsRelu) {
  std::mt19937_64 rng(51);
  ResidualParams p{{random_tensor(rng, {3, 3, 3, 3}), random_tensor(rng, {3})},
                   {Tensor::zeros({3, 3, 3, 3}), Tensor::zeros({3})}};
  const Tensor x = random_tensor(rng, {3, 5, 4});
  EXPECT_EQ(values(residual_block(x, p)), values(relu(x)));
  const Tensor pos = random_tensor(rng, {3, 5, 4}, 0.0, 1.0);
  EXPECT_EQ(values(residual_block(pos, p)), values(pos));
}

TEST(Cnn, ResidualBlockMatchesPrimitiveComposition) {
  std::mt19937_64 rng(52);
  for (int n = 0; n < 5; ++n) {
    const std::size_t c = 1 + rng() % 4, h = 1 + rng() % 6, w = 1 + rng() % 6;
    ResidualParams p{{random_tensor(rng, {c, c, 3, 3}), random_tensor(rng, {c})},
                     {random_tensor(rng, {c, c, 3, 3}), random_tensor(rng, {c})}};
    const Tensor x = random_tensor(rng, {c, h, w});
    const Tensor ref = relu(add(x, conv2d(relu(conv2d(x, p.conv1.weight, p.conv1.bias, 1, 1)), p.conv2.weight,
                                          p.conv2.bias, 1, 1)));
    const Tensor y = residual_block(x, p);
    ASSERT_EQ(y.shape(), x.shape());
    for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(y[i], ref[i], 1e-12);
  }
  ResidualParams bad{{Tensor::zeros({2, 2, 3, 3}), std::nullopt}, {Tensor::zeros({2, 2, 3, 3}), std::nullopt}};
  EXPECT_THROW(residual_block(Tensor::zeros({3, 4, 4}), bad), ShapeError);
}

TEST(Cnn, PyramidMatchesCvitForEveryHeight) {
  std::mt19937_64 rng(53);
  for (int h : {64, 128, 256}) {
    const ModelConfig cfg = narrow(h);
    ParameterSet set;
    ParamInit init(3);
    const CvitParams cv = CvitParams::create(cfg, init, set);
    const CnnParams cn = CnnParams::create(cfg, init, set);
    Tape::Pause pause;
    const Tensor pano = random_tensor(rng, {3, std::size_t(h), std::size_t(2 * h)});
    const FeaturePyramid g = cvit_forward(resample_equirect_to_cubemap(pano), cfg, cv);
    const FeaturePyramid l = cnn_forward(pano, cn);
    for (int lv = 0; lv < 4; ++lv) EXPECT_EQ(g.levels[lv].shape(), l.levels[lv].shape()) << "H=" << h;
  }
}

TEST(Cnn, ReceptiveFieldIsBounded) {
  const ModelConfig cfg = narrow(128);
  ParameterSet set;
  ParamInit init(4);
  const CnnParams cn = CnnParams::create(cfg, init, set);
  randomize_parameters(set, 5);
  Tape::Pause pause;
  Tensor pano = Tensor::full({3, 128, 256}, 0.3);
  const auto base = values(cnn_forward(pano, cn).levels[0]);
  pano.mutable_data()[64 * 256 + 128] += 1.0;  // channel 0, row 64, column 128
  const auto probe = values(cnn_forward(pano, cn).levels[0]);
  // Level 1 is 32×64; two stride-2 convs plus two 3×3 convs reach at most a few cells.
  std::size_t changed = 0;
  for (std::size_t c = 0; c < 4; ++c)
    for (std::size_t y = 0; y < 32; ++y)
      for (std::size_t x = 0; x < 64; ++x) {
        const std::size_t i = (c * 32 + y) * 64 + x;
        if (base[i] == probe[i]) continue;
        ++changed;
        EXPECT_LE(std::abs(long(y) - 16), 3) << "row " << y;
        EXPECT_LE(std::abs(long(x) - 32), 3) << "col " << x;
      }
  EXPECT_GT(changed, 0u);
}

TEST(Cvit, ZeroedResidualsLeaveTappedStatesEqualToEmbedding) {
  const ModelConfig cfg = narrow(64);
  ParameterSet set;
  ParamInit init(6);
  const CvitParams cv = CvitParams::create(cfg, init, set);
  std::mt19937_64 rng(54);
  Tape::Pause pause;
  CvitTrace trace;
  cvit_forward(resample_equirect_to_cubemap(random_tensor(rng, {3, 64, 128})), cfg, cv, &trace);
  for (const Tensor& t : trace.tapped) EXPECT_EQ(values(t), values(trace.embedded.tokens));
}

TEST(Cvit, GradientReachesEveryParameter) {
  // Default init zeroes the residual output projections, which blocks gradient
  // to everything upstream of them; random parameters exercise every path.
  const ModelConfig cfg = narrow(64);
  for (std::uint64_t seed : {1, 2, 3}) {
    ParameterSet set;
    ParamInit init(seed);
    const CvitParams cv = CvitParams::create(cfg, init, set);
    randomize_parameters(set, seed + 10);
    std::mt19937_64 rng(seed);
    const Tensor pano = random_tensor(rng, {3, 64, 128});
    Tape tape;
    {
      Tape::Scope scope(tape);
      const FeaturePyramid g = cvit_forward(resample_equirect_to_cubemap(pano), cfg, cv);
      Tensor loss = sum(g.levels[0]);
      for (int lv = 1; lv < 4; ++lv) loss = add(loss, sum(g.levels[lv]));
      backward(loss, tape);
    }
    for (const auto& [name, t] : set) EXPECT_GT(grad_norm(t), 0.0) << name << " seed " << seed;
  }
}

TEST(Decoder, ZeroFeaturesAndBiasesGiveZeroDepth) {
  const ModelConfig cfg = ModelConfig::tiny();
  ParameterSet set;
  ParamInit init(7);
  const DecoderParams dp = DecoderParams::create(cfg, init, set);
  for (auto& [name, t] : set) {
    if (name.size() >= 5 && name.compare(name.size() - 5, 5, ".bias") == 0) {
      for (double& v : t.mutable_data()) v = 0.0;
    }
  }
  FeaturePyramid f;
  for (int lv = 1; lv <= 4; ++lv) f.levels[lv - 1] = Tensor::zeros(cfg.level_shape(lv));
  Tape::Pause pause;
  const Tensor d = decoder_forward(f, dp).depth;
  ASSERT_EQ(d.shape(), (Shape{1, 64, 128}));
  for (double v : d.data()) EXPECT_EQ(v, 0.0);
}

TEST(Decoder, OutputIsNonNegative) {
  const ModelConfig cfg = ModelConfig::tiny();
  ParameterSet set;
  ParamInit init(8);
  const DecoderParams dp = DecoderParams::create(cfg, init, set);
  randomize_parameters(set, 9, 0.5);
  std::mt19937_64 rng(55);
  FeaturePyramid f;
  for (int lv = 1; lv <= 4; ++lv) f.levels[lv - 1] = random_tensor(rng, cfg.level_shape(lv), -3, 3);
  Tape::Pause pause;
  bool any_positive = false;
  for (double v : decoder_forward(f, dp).depth.data()) {
    EXPECT_GE(v, 0.0);
    any_positive |= v > 0.0;
  }
  EXPECT_TRUE(any_positive);
}
