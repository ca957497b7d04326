#pragma once

#include <cstdint>
#include <stdexcept>

#include "glpd/sample.hpp"

namespace glpd {

/// Procedural indoor scene: an axis-aligned room with boxes and spheres.
struct SceneSpec {
  int height = 64;  // one of 64, 128, 256
  int min_boxes = 1, max_boxes = 3;
  int min_spheres = 0, max_spheres = 2;
  double min_half_extent = 1.5, max_half_extent = 3.2;  // room half width/depth
  double min_room_height = 2.4, max_room_height = 3.2;
  bool empty_room = false;
  bool center_camera = false;  // camera at the room center instead of a random interior point
  int max_retries = 64;
};

class DegenerateScene : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kSynthMinDepth = 0.5;
inline constexpr double kSynthMaxDepth = 10.0;

/// Ray-casts one panorama. Deterministic per (spec, seed); every pixel is
/// valid and depth lies in [0.5, 10] m.
PanoSample synth_generate(const SceneSpec& spec, std::uint64_t seed);

}  // namespace glpd
