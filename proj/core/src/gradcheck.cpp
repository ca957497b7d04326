#include "glpd/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace glpd {

GradCheckResult gradient_check(const std::function<Tensor()>& f, Tensor x, double h,
                               const std::vector<std::size_t>& coords) {
  GradCheckResult result;
  const bool had_flag = x.requires_grad();
  x.set_requires_grad(true);
  x.zero_grad();

  Tape tape;
  double base = 0.0;
  {
    Tape::Scope scope(tape);
    Tensor loss = f();
    base = loss.item();
    backward(loss, tape);
  }
  std::vector<double> analytic(x.size(), 0.0);
  if (x.has_grad()) std::copy(x.grad().begin(), x.grad().end(), analytic.begin());
  x.zero_grad();
  x.set_requires_grad(had_flag);

  if (!std::isfinite(base)) {
    result.finite = false;
    return result;
  }

  std::vector<std::size_t> which = coords;
  if (which.empty()) {
    which.resize(x.size());
    std::iota(which.begin(), which.end(), std::size_t{0});
  }

  auto data = x.mutable_data();
  Tape::Pause pause;
  for (std::size_t i : which) {
    const double saved = data[i];
    data[i] = saved + h;
    const double fp = f().item();
    data[i] = saved - h;
    const double fm = f().item();
    data[i] = saved;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      result.finite = false;
      result.worst_index = i;
      return result;
    }
    const double numeric = (fp - fm) / (2.0 * h);
    const double err =
        std::abs(analytic[i] - numeric) / std::max({1.0, std::abs(analytic[i]), std::abs(numeric)});
    if (err > result.max_rel_error) {
      result.max_rel_error = err;
      result.worst_index = i;
    }
    ++result.checked;
  }
  return result;
}

}  // namespace glpd
