#include "glpd/loss.hpp"

#include <cmath>

namespace glpd {

ValidityMask validity_mask(const Tensor& gt) {
  ValidityMask m;
  m.shape = gt.shape();
  m.valid.resize(gt.size());
  auto d = gt.data();
  for (std::size_t i = 0; i < d.size(); ++i) {
    const bool ok = std::isfinite(d[i]) && d[i] > 0.0;
    m.valid[i] = ok ? 1 : 0;
    m.count_valid += ok ? 1 : 0;
  }
  if (m.count_valid == 0) throw SampleRejected("depth map has no valid pixels");
  return m;
}

double berhu(double residual, double threshold) {
  const double a = std::abs(residual);
  return a <= threshold ? a : (residual * residual + threshold * threshold) / (2.0 * threshold);
}

Tensor berhu_loss(const Tensor& pred, const Tensor& gt, const ValidityMask& mask, double threshold) {
  if (pred.shape() != gt.shape() || mask.shape != gt.shape()) {
    throw ShapeError("berhu_loss: pred " + shape_str(pred.shape()) + ", gt " + shape_str(gt.shape()) + ", mask " +
                     shape_str(mask.shape));
  }
  if (threshold <= 0.0) throw ContractError("berhu_loss: threshold must be positive");
  if (mask.count_valid == 0) throw SampleRejected("berhu_loss: empty mask");

  auto p = pred.data(), y = gt.data();
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (mask(i)) total += berhu(y[i] - p[i], threshold);
  }
  const double inv_n = 1.0 / static_cast<double>(mask.count_valid);
  Tensor out = Tensor::scalar(total * inv_n);

  Tape::record({pred}, out, [pred, gt, mask, out, threshold, inv_n](GradStore& gs) {
    const double g = gs.get(out)[0] * inv_n;
    auto gp = gs.acc(pred);
    auto p = pred.data(), y = gt.data();
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (!mask(i)) continue;
      const double d = y[i] - p[i];
      // dL/dpred = -dL/dd
      const double dd = std::abs(d) <= threshold ? (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0)) : d / threshold;
      gp[i] -= g * dd;
    }
  });
  return out;
}

}  // namespace glpd
