#include "glpd/cnn.hpp"

#include "glpd/ops.hpp"

namespace glpd {

namespace {

ConvParams make_conv(ParamInit& init, ParameterSet& set, const std::string& name, std::size_t out_c, std::size_t in_c,
                     std::size_t k) {
  ConvParams c;
  c.weight = set.add(name + ".weight", init.kaiming_uniform({out_c, in_c, k, k}, in_c * k * k));
  c.bias = set.add(name + ".bias", Tensor::zeros({out_c}));
  return c;
}

}  // namespace

CnnParams CnnParams::create(const ModelConfig& cfg, ParamInit& init, ParameterSet& set, const std::string& prefix) {
  cfg.validate();
  auto ch = [&](int l) { return static_cast<std::size_t>(cfg.level_channels[l]); };
  CnnParams p;
  p.stem1 = make_conv(init, set, prefix + "stem1", ch(0), static_cast<std::size_t>(cfg.in_channels), 3);
  p.stem2 = make_conv(init, set, prefix + "stem2", ch(0), ch(0), 3);
  for (int l = 0; l < 4; ++l) {
    const std::string b = prefix + "level" + std::to_string(l + 1) + ".res.";
    p.res[l].conv1 = make_conv(init, set, b + "conv1", ch(l), ch(l), 3);
    p.res[l].conv2 = make_conv(init, set, b + "conv2", ch(l), ch(l), 3);
  }
  for (int l = 0; l < 3; ++l) {
    p.down[l] = make_conv(init, set, prefix + "down" + std::to_string(l + 1), ch(l + 1), ch(l), 3);
  }
  return p;
}

Tensor residual_block(const Tensor& x, const ResidualParams& params) {
  if (x.rank() != 3 || x.dim(0) != params.conv1.weight.dim(1)) {
    throw ShapeError("residual_block: input " + shape_str(x.shape()) + " vs weight " +
                     shape_str(params.conv1.weight.shape()));
  }
  Tensor h = relu(conv2d(x, params.conv1.weight, params.conv1.bias, 1, 1));
  return relu(add(x, conv2d(h, params.conv2.weight, params.conv2.bias, 1, 1)));
}

Tensor downsample(const Tensor& x, const ConvParams& params) { return conv2d(x, params.weight, params.bias, 2, 1); }

FeaturePyramid cnn_forward(const Tensor& pano, const CnnParams& params, CnnStats* stats) {
  if (pano.rank() != 3 || pano.dim(2) != 2 * pano.dim(1)) {
    throw ShapeError("cnn_forward: panorama must be C×H×2H, got " + shape_str(pano.shape()));
  }
  Tensor x = relu(conv2d(pano, params.stem1.weight, params.stem1.bias, 2, 1));
  x = relu(conv2d(x, params.stem2.weight, params.stem2.bias, 2, 1));
  FeaturePyramid out;
  for (int l = 0; l < 4; ++l) {
    if (l > 0) x = downsample(x, params.down[l - 1]);
    x = residual_block(x, params.res[l]);
    if (stats) ++stats->residual_blocks;
    out.levels[l] = x;
  }
  return out;
}

}  // namespace glpd
