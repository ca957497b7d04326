#pragma once

#include <random>
#include <vector>

#include "glpd/tensor.hpp"

namespace glpd::test {

inline Tensor random_tensor(std::mt19937_64& rng, Shape s, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(numel(s));
  for (auto& x : v) x = d(rng);
  return Tensor(std::move(s), std::move(v));
}

inline std::vector<double> values(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

}  // namespace glpd::test
