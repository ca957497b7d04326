#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace glpd {

using Shape = std::vector<std::size_t>;

/// Raised when operand shapes are incompatible with an operation.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a precondition that is not about shapes is violated.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

std::size_t numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

struct TensorImpl {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until a backward pass touches it
  bool requires_grad = false;
  bool is_leaf = true;
};

}  // namespace detail

/// Dense row-major float64 array with an optional gradient slot.
///
/// Copies share storage (handle semantics). Data produced by an op is never
/// mutated afterwards; the optimizer is the only writer of parameter data.
class Tensor {
 public:
  Tensor();
  Tensor(Shape shape, std::vector<double> data, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  static Tensor from(std::initializer_list<double> values, Shape shape);

  const Shape& shape() const { return impl_->shape; }
  std::size_t dim(std::size_t i) const;
  std::size_t rank() const { return impl_->shape.size(); }
  std::size_t size() const { return impl_->data.size(); }

  std::span<const double> data() const { return impl_->data; }
  /// Mutable access. Only for leaves (parameters, inputs) outside of a
  /// recorded forward pass.
  std::span<double> mutable_data() { return impl_->data; }
  double item() const;
  double operator[](std::size_t i) const { return impl_->data[i]; }

  bool requires_grad() const { return impl_->requires_grad; }
  Tensor& set_requires_grad(bool on);
  bool is_leaf() const { return impl_->is_leaf; }

  bool has_grad() const { return !impl_->grad.empty(); }
  std::span<const double> grad() const { return impl_->grad; }
  std::span<double> mutable_grad();
  void zero_grad() { impl_->grad.clear(); }

  /// Deep copy with no autodiff history.
  Tensor detach() const;

  detail::TensorImpl* impl() const { return impl_.get(); }
  const std::shared_ptr<detail::TensorImpl>& handle() const { return impl_; }

 private:
  std::shared_ptr<detail::TensorImpl> impl_;
};

/// Gradient buffers for one backward pass, keyed by tensor.
class GradStore {
 public:
  /// Incoming gradient of `t`, or an empty span if nothing flowed to it.
  std::span<const double> get(const Tensor& t) const;
  /// Zero-initialized accumulation buffer for `t`.
  std::span<double> acc(const Tensor& t);

 private:
  friend void backward(const Tensor& loss, class Tape& tape);
  std::unordered_map<const detail::TensorImpl*, std::vector<double>> buffers_;
};

/// Ordered record of primitive applications for one forward pass.
///
/// Ops record onto the tape installed by a `Tape::Scope` on the current
/// thread; with no active tape nothing is recorded.
class Tape {
 public:
  using BackwardFn = std::function<void(GradStore&)>;

  struct Node {
    std::vector<Tensor> inputs;
    Tensor output;
    BackwardFn backward;
  };

  class Scope {
   public:
    explicit Scope(Tape& tape);
    ~Scope();
    Scope(const Scope&) = delete;
    Scope& operator=(const Scope&) = delete;

   private:
    Tape* previous_;
  };

  /// Suspends recording on this thread for its lifetime.
  class Pause {
   public:
    Pause();
    ~Pause();
    Pause(const Pause&) = delete;
    Pause& operator=(const Pause&) = delete;

   private:
    Tape* previous_;
  };

  static Tape* current();

  /// Records `output = f(inputs)` if recording is active and any input needs
  /// a gradient. Marks `output` as a non-leaf that requires grad.
  static void record(std::vector<Tensor> inputs, Tensor& output, BackwardFn fn);

  std::size_t size() const { return nodes_.size(); }
  const std::vector<Node>& nodes() const { return nodes_; }
  void clear() { nodes_.clear(); }

 private:
  std::vector<Node> nodes_;
};

/// Reverse pass over `tape`, seeding d(loss)/d(loss) = 1. Leaf gradients are
/// accumulated additively into their grad slots.
void backward(const Tensor& loss, Tape& tape);

}  // namespace glpd
