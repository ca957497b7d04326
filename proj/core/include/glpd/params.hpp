#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "glpd/tensor.hpp"

namespace glpd {

/// Named trainable tensors, iterated in name order.
class ParameterSet {
 public:
  /// Registers a tensor under `name`; duplicates are a contract error.
  Tensor add(const std::string& name, Tensor t);
  const Tensor& at(const std::string& name) const;
  Tensor& at(const std::string& name);
  bool contains(const std::string& name) const { return params_.count(name) != 0; }

  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;
  void zero_grad();

  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }

 private:
  std::map<std::string, Tensor> params_;
};

/// Seeded initializers for parameter tensors.
class ParamInit {
 public:
  explicit ParamInit(std::uint64_t seed) : rng_(seed) {}

  /// U(-b, b) with b = sqrt(6 / fan_in).
  Tensor kaiming_uniform(Shape shape, std::size_t fan_in);
  /// Normal(0, std) resampled outside ±2·std.
  Tensor trunc_normal(Shape shape, double std);
  Tensor uniform(Shape shape, double lo, double hi);
  Tensor normal(Shape shape, double std);

  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

/// Overwrites every parameter with N(0, std) draws; used to leave the
/// zero-initialized residual projections for gradient-flow probes.
void randomize_parameters(ParameterSet& params, std::uint64_t seed, double std = 0.1);

}  // namespace glpd

namespace glpd {

/// Rounds every parameter to the nearest float32 value. Keeps in-memory
/// weights identical to what a float32 checkpoint stores.
void snap_to_f32(ParameterSet& params);
void snap_to_f32(std::vector<double>& values);

}  // namespace glpd
