#include "glpd/fusion.hpp"

#include "glpd/ops.hpp"

namespace glpd {

namespace {

ConvParams kaiming_conv(ParamInit& init, ParameterSet& set, const std::string& name, std::size_t out_c,
                        std::size_t in_c, std::size_t k) {
  ConvParams c;
  c.weight = set.add(name + ".weight", init.kaiming_uniform({out_c, in_c, k, k}, in_c * k * k));
  c.bias = set.add(name + ".bias", Tensor::zeros({out_c}));
  return c;
}

ConvParams zero_conv(ParameterSet& set, const std::string& name, std::size_t out_c, std::size_t in_c, std::size_t k) {
  ConvParams c;
  c.weight = set.add(name + ".weight", Tensor::zeros({out_c, in_c, k, k}));
  c.bias = set.add(name + ".bias", Tensor::zeros({out_c}));
  return c;
}

Tensor apply(const Tensor& x, const ConvParams& p, int pad) { return conv2d(x, p.weight, p.bias, 1, pad); }

}  // namespace

FusionParams FusionParams::create(const ModelConfig& cfg, ParamInit& init, ParameterSet& set,
                                  const std::string& prefix) {
  FusionParams p;
  p.mode = cfg.fusion_mode;
  for (int l = 0; l < 4; ++l) {
    const std::size_t c = static_cast<std::size_t>(cfg.level_channels[l]);
    const std::string b = prefix + "level" + std::to_string(l + 1) + ".";
    if (cfg.fusion_mode == FusionMode::gated) {
      p.levels[l].gate_a = kaiming_conv(init, set, b + "gate_a", c, c, 3);
      p.levels[l].gate_b = zero_conv(set, b + "gate_b", c, c, 3);
    } else {
      p.levels[l].project = kaiming_conv(init, set, b + "project", c, 2 * c, 1);
    }
  }
  return p;
}

DecoderParams DecoderParams::create(const ModelConfig& cfg, ParamInit& init, ParameterSet& set,
                                    const std::string& prefix) {
  auto ch = [&](int l) { return static_cast<std::size_t>(cfg.level_channels[l]); };
  DecoderParams p;
  for (int l = 0; l < 3; ++l) {
    const std::string b = prefix + "level" + std::to_string(l + 1) + ".";
    p.refine[l] = kaiming_conv(init, set, b + "refine", ch(l), ch(l + 1), 3);
    p.skip[l] = kaiming_conv(init, set, b + "skip", ch(l), ch(l), 1);
  }
  p.head = kaiming_conv(init, set, prefix + "head", ch(0), ch(0), 3);
  p.out = kaiming_conv(init, set, prefix + "out", 1, ch(0), 3);
  return p;
}

Tensor gate_map(const Tensor& fg, const Tensor& fl, const FusionLevelParams& params) {
  return sigmoid(apply(apply(add(fg, fl), params.gate_a, 1), params.gate_b, 1));
}

Tensor gated_fuse(const Tensor& fg, const Tensor& fl, const FusionLevelParams& params, FusionMode mode) {
  if (fg.shape() != fl.shape()) {
    throw ShapeError("gated_fuse: global " + shape_str(fg.shape()) + " vs local " + shape_str(fl.shape()));
  }
  if (mode == FusionMode::concat) return apply(concat({fg, fl}, 0), params.project, 0);
  Tensor g = gate_map(fg, fl, params);
  return add(mul(fg, g), mul(fl, affine(g, -1.0, 1.0)));
}

DepthPrediction decoder_forward(const FeaturePyramid& fused, const DecoderParams& params) {
  Tensor x = fused.levels[3];
  for (int l = 2; l >= 0; --l) {
    Tensor up = upsample_bilinear(apply(x, params.refine[l], 1), 2);
    x = add(up, apply(fused.levels[l], params.skip[l], 0));
  }
  Tensor h = upsample_bilinear(apply(x, params.head, 1), 4);
  return DepthPrediction{relu(apply(h, params.out, 1))};
}

}  // namespace glpd
