#pragma once

#include <string>

#include "glpd/loss.hpp"
#include "glpd/tensor.hpp"

namespace glpd {

/// Equirectangular RGB (3×H×2H, values in [0,1]) with metric depth (1×H×2H).
struct PanoSample {
  std::string name;
  Tensor rgb;
  Tensor depth;
  ValidityMask mask;
};

}  // namespace glpd
