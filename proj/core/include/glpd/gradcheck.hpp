#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "glpd/tensor.hpp"

namespace glpd {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
  bool finite = true;

  bool passed(double tol) const { return finite && max_rel_error < tol; }
};

/// Compares the taped gradient of scalar `f` at `x` with central differences.
///
/// Error per coordinate is |analytic − numeric| / max(1, |analytic|, |numeric|).
/// `coords` restricts the check to a subset of flat indices (all when empty).
/// `x` is perturbed in place and restored afterwards.
GradCheckResult gradient_check(const std::function<Tensor()>& f, Tensor x, double h = 1e-5,
                               const std::vector<std::size_t>& coords = {});

}  // namespace glpd
