#include "glpd/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace glpd {

namespace {
thread_local Tape* active_tape = nullptr;
}

std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         [](std::size_t a, std::size_t b) { return a * b; });
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ')';
  return os.str();
}

Tensor::Tensor() : impl_(std::make_shared<detail::TensorImpl>()) {
  impl_->shape = {};
  impl_->data = {0.0};
}

Tensor::Tensor(Shape shape, std::vector<double> data, bool requires_grad)
    : impl_(std::make_shared<detail::TensorImpl>()) {
  for (auto d : shape) {
    if (d == 0) throw ShapeError("tensor dims must be positive, got " + shape_str(shape));
  }
  if (numel(shape) != data.size()) {
    throw ShapeError("tensor data length " + std::to_string(data.size()) + " does not match shape " +
                     shape_str(shape));
  }
  impl_->shape = std::move(shape);
  impl_->data = std::move(data);
  impl_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const auto n = numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) { return Tensor({}, {value}, requires_grad); }

Tensor Tensor::from(std::initializer_list<double> values, Shape shape) {
  return Tensor(std::move(shape), std::vector<double>(values));
}

std::size_t Tensor::dim(std::size_t i) const {
  if (i >= impl_->shape.size()) {
    throw ShapeError("dim " + std::to_string(i) + " out of range for shape " + shape_str(impl_->shape));
  }
  return impl_->shape[i];
}

double Tensor::item() const {
  if (impl_->data.size() != 1) throw ShapeError("item() on tensor of shape " + shape_str(impl_->shape));
  return impl_->data[0];
}

Tensor& Tensor::set_requires_grad(bool on) {
  impl_->requires_grad = on;
  return *this;
}

std::span<double> Tensor::mutable_grad() {
  if (impl_->grad.empty()) impl_->grad.assign(impl_->data.size(), 0.0);
  return impl_->grad;
}

Tensor Tensor::detach() const { return Tensor(impl_->shape, impl_->data, false); }

std::span<const double> GradStore::get(const Tensor& t) const {
  auto it = buffers_.find(t.impl());
  if (it == buffers_.end()) return {};
  return it->second;
}

std::span<double> GradStore::acc(const Tensor& t) {
  auto [it, inserted] = buffers_.try_emplace(t.impl());
  if (inserted) it->second.assign(t.size(), 0.0);
  return it->second;
}

Tape::Scope::Scope(Tape& tape) : previous_(active_tape) { active_tape = &tape; }
Tape::Scope::~Scope() { active_tape = previous_; }

Tape::Pause::Pause() : previous_(active_tape) { active_tape = nullptr; }
Tape::Pause::~Pause() { active_tape = previous_; }

Tape* Tape::current() { return active_tape; }

void Tape::record(std::vector<Tensor> inputs, Tensor& output, BackwardFn fn) {
  Tape* tape = active_tape;
  if (tape == nullptr) return;
  bool any = false;
  for (const auto& in : inputs) any = any || in.requires_grad();
  if (!any) return;
  output.impl()->requires_grad = true;
  output.impl()->is_leaf = false;
  tape->nodes_.push_back(Node{std::move(inputs), output, std::move(fn)});
}

void backward(const Tensor& loss, Tape& tape) {
  if (loss.size() != 1) {
    throw ContractError("backward() needs a scalar loss, got shape " + shape_str(loss.shape()));
  }
  GradStore store;
  store.acc(loss)[0] = 1.0;

  const auto& nodes = tape.nodes();
  for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
    if (store.get(it->output).empty()) continue;
    it->backward(store);
  }

  // Leaves are flushed in tape order so the result never depends on hash-map
  // iteration order.
  std::unordered_set<const detail::TensorImpl*> flushed;
  for (const auto& node : nodes) {
    for (const auto& in : node.inputs) {
      if (!in.is_leaf() || !in.requires_grad() || !flushed.insert(in.impl()).second) continue;
      auto g = store.get(in);
      if (g.empty()) continue;
      Tensor leaf = in;
      auto slot = leaf.mutable_grad();
      for (std::size_t i = 0; i < g.size(); ++i) slot[i] += g[i];
    }
  }
}

}  // namespace glpd
