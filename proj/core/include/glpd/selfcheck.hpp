#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace glpd {

struct CheckOutcome {
  std::string name;
  bool passed = false;
  double value = 0.0;  // worst error, or PSNR for image checks
  std::string detail;
};

/// Central-difference checks of every differentiable primitive, `cases` random
/// instances each, against `tol` relative error.
std::vector<CheckOutcome> primitive_gradient_checks(int cases, std::uint64_t seed, double tol = 1e-6);

/// Direction/pixel round trips and equirect→cubemap→equirect PSNR on a smooth
/// spherical test pattern at the given height.
std::vector<CheckOutcome> projection_checks(int height);

/// Smooth test pattern on the unit sphere, values within [0, 1].
double band_limited_pattern(double x, double y, double z, int channel);

}  // namespace glpd
