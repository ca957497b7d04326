#include "glpd/model_config.hpp"

#include <algorithm>

namespace glpd {

std::string to_string(FusionMode mode) { return mode == FusionMode::gated ? "gated" : "concat"; }

FusionMode fusion_mode_from_string(const std::string& s) {
  if (s == "gated") return FusionMode::gated;
  if (s == "concat") return FusionMode::concat;
  throw ContractError("unknown fusion mode '" + s + "' (expected gated|concat)");
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ContractError("invalid model config: " + msg); };
  if (height <= 0 || width != 2 * height) fail("width must equal 2*height");
  if (height % 32 != 0) fail("height must be a multiple of 32 for the four-level pyramid");
  if (in_channels <= 0) fail("in_channels must be positive");
  if (patch <= 0 || face_size() % patch != 0) fail("face size H/2 must be divisible by the patch size");
  if ((patch & (patch - 1)) != 0) fail("patch size must be a power of two");
  if (blocks <= 0) fail("block count must be positive");
  if (dim <= 0 || heads <= 0 || dim % heads != 0) fail("dim must be divisible by heads");
  if (mlp_ratio <= 0) fail("mlp_ratio must be positive");
  if (!std::is_sorted(taps.begin(), taps.end())) fail("taps must be sorted ascending");
  if (taps.front() < 1 || taps.back() > blocks) fail("taps must lie in [1, blocks]");
  for (int c : level_channels)
    if (c <= 0) fail("level channels must be positive");
  if (ln_eps <= 0.0) fail("ln_eps must be positive");
}

std::size_t ModelConfig::token_count() const {
  const std::size_t s = static_cast<std::size_t>(face_size());
  return 6 * s * s / static_cast<std::size_t>(patch * patch);
}

Shape ModelConfig::level_shape(int level) const {
  if (level < 1 || level > 4) throw ContractError("pyramid level must be in 1..4");
  const int div = 1 << (level + 1);
  return {static_cast<std::size_t>(level_channels[level - 1]), static_cast<std::size_t>(height / div),
          static_cast<std::size_t>(width / div)};
}

ModelConfig ModelConfig::tiny() {
  ModelConfig c;
  c.height = 64;
  c.width = 128;
  c.patch = 16;
  c.blocks = 4;
  c.taps = {1, 2, 3, 4};
  c.dim = 64;
  c.heads = 4;
  c.mlp_ratio = 2;
  c.level_channels = {16, 32, 64, 64};
  return c;
}

bool operator==(const ModelConfig& a, const ModelConfig& b) {
  return a.height == b.height && a.width == b.width && a.in_channels == b.in_channels && a.patch == b.patch &&
         a.blocks == b.blocks && a.taps == b.taps && a.dim == b.dim && a.heads == b.heads &&
         a.mlp_ratio == b.mlp_ratio && a.level_channels == b.level_channels && a.fusion_mode == b.fusion_mode &&
         a.ln_eps == b.ln_eps;
}

}  // namespace glpd
