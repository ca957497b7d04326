#include "glpd/params.hpp"

#include <cmath>

namespace glpd {

Tensor ParameterSet::add(const std::string& name, Tensor t) {
  if (params_.count(name)) throw ContractError("duplicate parameter name: " + name);
  t.set_requires_grad(true);
  params_.emplace(name, t);
  return t;
}

const Tensor& ParameterSet::at(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw ContractError("unknown parameter: " + name);
  return it->second;
}

Tensor& ParameterSet::at(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw ContractError("unknown parameter: " + name);
  return it->second;
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [_, t] : params_) n += t.size();
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& [_, t] : params_) t.zero_grad();
}

Tensor ParamInit::kaiming_uniform(Shape shape, std::size_t fan_in) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  return uniform(std::move(shape), -bound, bound);
}

Tensor ParamInit::trunc_normal(Shape shape, double std) {
  std::normal_distribution<double> dist(0.0, std);
  std::vector<double> v(numel(shape));
  for (auto& x : v) {
    do {
      x = dist(rng_);
    } while (std::abs(x) > 2.0 * std);
  }
  return Tensor(std::move(shape), std::move(v));
}

Tensor ParamInit::uniform(Shape shape, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(numel(shape));
  for (auto& x : v) x = dist(rng_);
  return Tensor(std::move(shape), std::move(v));
}

Tensor ParamInit::normal(Shape shape, double std) {
  std::normal_distribution<double> dist(0.0, std);
  std::vector<double> v(numel(shape));
  for (auto& x : v) x = dist(rng_);
  return Tensor(std::move(shape), std::move(v));
}

void randomize_parameters(ParameterSet& params, std::uint64_t seed, double std) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, std);
  for (auto& [_, t] : params) {
    for (auto& x : t.mutable_data()) x = dist(rng);
  }
}

}  // namespace glpd

namespace glpd {

void snap_to_f32(std::vector<double>& values) {
  for (auto& x : values) x = static_cast<double>(static_cast<float>(x));
}

void snap_to_f32(ParameterSet& params) {
  for (auto& [_, t] : params) {
    for (auto& x : t.mutable_data()) x = static_cast<double>(static_cast<float>(x));
  }
}

}  // namespace glpd
