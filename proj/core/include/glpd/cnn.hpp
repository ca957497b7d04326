#pragma once

#include <array>
#include <string>

#include "glpd/cvit.hpp"
#include "glpd/model_config.hpp"
#include "glpd/params.hpp"

namespace glpd {

struct ConvParams {
  Tensor weight;
  std::optional<Tensor> bias;
};

struct ResidualParams {
  ConvParams conv1, conv2;
};

struct CnnParams {
  ConvParams stem1, stem2;            // 3×3 stride 2 each: H -> H/4
  std::array<ResidualParams, 4> res;  // one block per pyramid level
  std::array<ConvParams, 3> down;     // stride-2 3×3 between levels

  static CnnParams create(const ModelConfig& cfg, ParamInit& init, ParameterSet& set, const std::string& prefix = "cnn.");
};

/// relu(x + conv2(relu(conv1(x)))), both 3×3 stride 1 pad 1.
Tensor residual_block(const Tensor& x, const ResidualParams& params);
/// 3×3 stride 2 pad 1 conv, no activation.
Tensor downsample(const Tensor& x, const ConvParams& params);

struct CnnStats {
  int residual_blocks = 0;
};

FeaturePyramid cnn_forward(const Tensor& pano, const CnnParams& params,
                           CnnStats* stats = nullptr);

}  // namespace glpd
