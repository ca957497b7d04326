#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "glpd/tensor.hpp"

namespace glpd {

/// A depth map with no usable pixels.
class SampleRejected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Pixels with finite, strictly positive ground truth.
struct ValidityMask {
  Shape shape;
  std::vector<std::uint8_t> valid;
  std::size_t count_valid = 0;

  bool operator()(std::size_t i) const { return valid[i] != 0; }
};

/// Throws SampleRejected when no pixel is valid.
ValidityMask validity_mask(const Tensor& gt);

inline constexpr double kBerhuThreshold = 0.2;

/// Reverse Huber penalty of one residual.
double berhu(double residual, double threshold);

/// Mean BerHu penalty over valid pixels; differentiable w.r.t. `pred`.
Tensor berhu_loss(const Tensor& pred, const Tensor& gt, const ValidityMask& mask,
                  double threshold = kBerhuThreshold);

}  // namespace glpd
