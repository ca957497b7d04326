#pragma once

#include <optional>
#include <string>
#include <vector>

#include "glpd/model_config.hpp"
#include "glpd/params.hpp"
#include "glpd/sphere.hpp"
#include "glpd/tensor.hpp"

namespace glpd {

/// Four feature maps at H/4, H/8, H/16, H/32 (index 0 is the finest).
struct FeaturePyramid {
  std::array<Tensor, 4> levels;
};

/// Cubemap patch tokens, face-major then row-major inside each face.
struct TokenBatch {
  Tensor tokens;  // N_p × d
  std::size_t faces = 6;
  std::size_t grid = 0;  // patches per face side

  std::size_t count() const { return tokens.dim(0); }
};

struct PatchEmbedParams {
  Tensor weight;  // C·p² × d
  std::optional<Tensor> bias;
  Tensor position;  // N_p × d
};

struct BlockParams {
  Tensor ln1_gamma, ln1_beta;
  Tensor qkv_w, qkv_b;    // d × 3d
  Tensor proj_w, proj_b;  // d × d, zero-initialized
  Tensor ln2_gamma, ln2_beta;
  Tensor fc1_w, fc1_b;  // d × mlp_ratio·d
  Tensor fc2_w, fc2_b;  // mlp_ratio·d × d, zero-initialized
};

struct ReassembleParams {
  Tensor token_map;  // (H/p·W/p) × N_p, mixes along the token axis
  Tensor channel_w;  // d × C_l
  std::optional<Tensor> channel_b;
};

struct RecoverParams {
  Tensor conv_w;  // 1×1
  std::optional<Tensor> conv_b;
  std::vector<Tensor> down_w;  // stride-2 3×3 convs when the level is coarser than H/p
  std::vector<Tensor> down_b;
};

struct CvitParams {
  PatchEmbedParams embed;
  std::vector<BlockParams> blocks;
  std::array<ReassembleParams, 4> reassemble;
  std::array<RecoverParams, 4> recover;

  static CvitParams create(const ModelConfig& cfg, ParamInit& init, ParameterSet& set,
                           const std::string& prefix = "cvit.");
};

/// Spatial rescale factor of the recover layer for a level: positive r means
/// pixel_shuffle by r, 1 means a plain 1×1 conv, and -n means n stride-2
/// convs after the 1×1 conv.
int recover_factor(const ModelConfig& cfg, int level);

TokenBatch patchify_and_embed(const CubemapTensor& cm, const ModelConfig& cfg, const PatchEmbedParams& params);
TokenBatch transformer_block(const TokenBatch& t, const BlockParams& params, int heads, double ln_eps = 1e-6);
Tensor reassemble(const TokenBatch& t, const ModelConfig& cfg, const ReassembleParams& params);
Tensor recover_scale(const Tensor& m, int level, const ModelConfig& cfg, const RecoverParams& params);

/// Optional record of intermediate states for inspection.
struct CvitTrace {
  TokenBatch embedded;
  std::array<Tensor, 4> tapped;
};

FeaturePyramid cvit_forward(const CubemapTensor& cm, const ModelConfig& cfg, const CvitParams& params,
                            CvitTrace* trace = nullptr);

}  // namespace glpd
