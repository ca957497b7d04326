#pragma once

#include <cstdint>

#include "glpd/cnn.hpp"
#include "glpd/cvit.hpp"
#include "glpd/fusion.hpp"
#include "glpd/model_config.hpp"
#include "glpd/params.hpp"

namespace glpd {

/// Two-branch panoramic depth network: cubemap transformer + equirect CNN,
/// fused per pyramid level and decoded to a full-resolution depth map.
class GLPanoDepth {
 public:
  GLPanoDepth(const ModelConfig& cfg, std::uint64_t seed);

  GLPanoDepth(const GLPanoDepth&) = delete;
  GLPanoDepth& operator=(const GLPanoDepth&) = delete;
  GLPanoDepth(GLPanoDepth&&) = default;
  GLPanoDepth& operator=(GLPanoDepth&&) = default;

  const ModelConfig& config() const { return cfg_; }
  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }

  const CvitParams& cvit() const { return cvit_; }
  const CnnParams& cnn() const { return cnn_; }
  const FusionParams& fusion() const { return fusion_; }
  const DecoderParams& decoder() const { return decoder_; }

  DepthPrediction forward(const Tensor& pano) const;

 private:
  ModelConfig cfg_;
  ParameterSet params_;
  CvitParams cvit_;
  CnnParams cnn_;
  FusionParams fusion_;
  DecoderParams decoder_;
};

/// e2c -> CViT, CNN on the panorama, per-level fusion, decoder.
DepthPrediction model_forward(const Tensor& pano, const GLPanoDepth& model);

}  // namespace glpd
