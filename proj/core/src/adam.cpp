#include "glpd/adam.hpp"

#include <cmath>

namespace glpd {

void AdamConfig::validate() const {
  if (!(lr > 0.0)) throw ContractError("adam: lr must be positive");
  if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) throw ContractError("adam: betas must lie in [0, 1)");
  if (!(eps > 0.0)) throw ContractError("adam: eps must be positive");
}

void adam_step(ParameterSet& params, AdamState& state, const AdamConfig& cfg) {
  cfg.validate();
  for (const auto& [name, t] : params) {
    auto m = state.m.find(name);
    auto v = state.v.find(name);
    if ((m != state.m.end() && m->second.size() != t.size()) || (v != state.v.end() && v->second.size() != t.size())) {
      throw ContractError("adam: moment shape mismatch for " + name);
    }
    if (t.has_grad() && t.grad().size() != t.size()) throw ContractError("adam: gradient shape mismatch for " + name);
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (auto& [name, param] : params) {
    auto& m = state.m[name];
    auto& v = state.v[name];
    if (m.empty()) m.assign(param.size(), 0.0);
    if (v.empty()) v.assign(param.size(), 0.0);
    auto data = param.mutable_data();
    const bool has = param.has_grad();
    auto g = param.grad();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double gi = has ? g[i] : 0.0;
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * gi;
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * gi * gi;
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      data[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

}  // namespace glpd
