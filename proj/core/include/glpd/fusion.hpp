#pragma once

#include <array>
#include <string>

#include "glpd/cnn.hpp"
#include "glpd/cvit.hpp"

namespace glpd {

/// Per-level gate convolutions, or the 1×1 projection in concat mode.
struct FusionLevelParams {
  ConvParams gate_a, gate_b;  // gated: 3×3 channel-preserving, gate_b zero-initialized
  ConvParams project;         // concat: 1×1, 2C -> C
};

struct FusionParams {
  FusionMode mode = FusionMode::gated;
  std::array<FusionLevelParams, 4> levels;

  static FusionParams create(const ModelConfig& cfg, ParamInit& init, ParameterSet& set,
                             const std::string& prefix = "fusion.");
};

struct DecoderParams {
  std::array<ConvParams, 3> refine;  // refine[l-1]: 3×3, C_{l+1} -> C_l
  std::array<ConvParams, 3> skip;    // skip[l-1]: 1×1, C_l -> C_l
  ConvParams head;                   // 3×3, C_1 -> C_1
  ConvParams out;                    // 3×3, C_1 -> 1

  static DecoderParams create(const ModelConfig& cfg, ParamInit& init, ParameterSet& set,
                              const std::string& prefix = "decoder.");
};

/// Nonnegative depth in meters, 1×H×W.
struct DepthPrediction {
  Tensor depth;
};

/// Sigmoid gate map G = sigmoid(conv_b(conv_a(fg + fl))).
Tensor gate_map(const Tensor& fg, const Tensor& fl, const FusionLevelParams& params);

/// gated: fg⊗G + fl⊗(1−G); concat: 1×1 conv over [fg; fl].
Tensor gated_fuse(const Tensor& fg, const Tensor& fl, const FusionLevelParams& params, FusionMode mode);

DepthPrediction decoder_forward(const FeaturePyramid& fused, const DecoderParams& params);

}  // namespace glpd
