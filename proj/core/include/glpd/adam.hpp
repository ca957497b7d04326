#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "glpd/params.hpp"

namespace glpd {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
};

/// First/second moments keyed by parameter name, plus the step counter.
struct AdamState {
  std::int64_t step = 0;
  std::map<std::string, std::vector<double>> m;
  std::map<std::string, std::vector<double>> v;
};

/// One bias-corrected Adam update over `params` in name order. Parameters
/// without a gradient are treated as having a zero gradient.
void adam_step(ParameterSet& params, AdamState& state, const AdamConfig& cfg);

}  // namespace glpd
