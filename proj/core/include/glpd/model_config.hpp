#pragma once

#include <array>
#include <cstddef>
#include <string>

#include "glpd/tensor.hpp"

namespace glpd {

enum class FusionMode { gated, concat };

std::string to_string(FusionMode mode);
FusionMode fusion_mode_from_string(const std::string& s);

/// Architecture hyperparameters shared by both branches and the decoder.
struct ModelConfig {
  int height = 256;
  int width = 512;
  int in_channels = 3;
  int patch = 16;
  int blocks = 12;
  std::array<int, 4> taps = {4, 7, 10, 12};  // 1-based block indices
  int dim = 256;
  int heads = 8;
  int mlp_ratio = 4;
  std::array<int, 4> level_channels = {64, 128, 256, 512};
  FusionMode fusion_mode = FusionMode::gated;
  double ln_eps = 1e-6;

  /// Throws ContractError describing the first violated constraint.
  void validate() const;

  int face_size() const { return height / 2; }
  int face_grid() const { return face_size() / patch; }
  /// 6·(H/2)²/p²
  std::size_t token_count() const;
  /// Spatial size of a reassembled token map: (H/p)×(W/p).
  std::size_t token_grid_h() const { return static_cast<std::size_t>(height / patch); }
  std::size_t token_grid_w() const { return static_cast<std::size_t>(width / patch); }
  /// Shape of pyramid level l ∈ {1..4}: C_l × H/2^{l+1} × W/2^{l+1}.
  Shape level_shape(int level) const;

  /// Desk-scale preset used by tests and the overfit runs (H=64).
  static ModelConfig tiny();
};

bool operator==(const ModelConfig& a, const ModelConfig& b);

}  // namespace glpd
