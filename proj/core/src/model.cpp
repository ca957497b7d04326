#include "glpd/model.hpp"

#include "glpd/sphere.hpp"

namespace glpd {

GLPanoDepth::GLPanoDepth(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  ParamInit init(seed);
  cvit_ = CvitParams::create(cfg_, init, params_);
  cnn_ = CnnParams::create(cfg_, init, params_);
  fusion_ = FusionParams::create(cfg_, init, params_);
  decoder_ = DecoderParams::create(cfg_, init, params_);
  snap_to_f32(params_);
}

DepthPrediction GLPanoDepth::forward(const Tensor& pano) const {
  const Shape expected{static_cast<std::size_t>(cfg_.in_channels), static_cast<std::size_t>(cfg_.height),
                       static_cast<std::size_t>(cfg_.width)};
  if (pano.shape() != expected) {
    throw ShapeError("model input " + shape_str(pano.shape()) + " does not match config " + shape_str(expected));
  }
  FeaturePyramid global = cvit_forward(resample_equirect_to_cubemap(pano), cfg_, cvit_);
  FeaturePyramid local = cnn_forward(pano, cnn_);
  FeaturePyramid fused;
  for (int l = 0; l < 4; ++l) {
    fused.levels[l] = gated_fuse(global.levels[l], local.levels[l], fusion_.levels[l], fusion_.mode);
  }
  return decoder_forward(fused, decoder_);
}

DepthPrediction model_forward(const Tensor& pano, const GLPanoDepth& model) { return model.forward(pano); }

}  // namespace glpd
