#include "glpd/selfcheck.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "glpd/gradcheck.hpp"
#include "glpd/loss.hpp"
#include "glpd/ops.hpp"
#include "glpd/sphere.hpp"

namespace glpd {

namespace {

class Rand {
 public:
  explicit Rand(std::uint64_t seed) : rng_(seed) {}
  Tensor tensor(Shape s, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> v(numel(s));
    for (auto& x : v) x = d(rng_);
    return Tensor(std::move(s), std::move(v));
  }
  std::size_t pick(std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_); }

 private:
  std::mt19937_64 rng_;
};

// Reduces an op output to a scalar with fixed random weights so every output
// element carries a distinct upstream gradient.
Tensor weighted_sum(const Tensor& y, const Tensor& w) { return sum(mul(y, w)); }

struct Case {
  std::function<Tensor()> f;
  std::vector<Tensor> inputs;
};

using Builder = std::function<Case(Rand&)>;

Case unary(Rand& r, Shape s, std::function<Tensor(const Tensor&)> op, double lo = -1.0, double hi = 1.0) {
  Tensor x = r.tensor(s, lo, hi);
  Tensor probe = op(x);
  Tensor w = r.tensor(probe.shape());
  return {[x, w, op] { return weighted_sum(op(x), w); }, {x}};
}

Case binary(Rand& r, Shape sa, Shape sb, std::function<Tensor(const Tensor&, const Tensor&)> op) {
  Tensor a = r.tensor(sa), b = r.tensor(sb);
  Tensor w = r.tensor(op(a, b).shape());
  return {[a, b, w, op] { return weighted_sum(op(a, b), w); }, {a, b}};
}

std::vector<std::pair<std::string, Builder>> primitives() {
  std::vector<std::pair<std::string, Builder>> p;
  p.emplace_back("add", [](Rand& r) {
    Shape s{r.pick(1, 4), r.pick(1, 5)};
    return binary(r, s, s, add);
  });
  p.emplace_back("sub", [](Rand& r) {
    Shape s{r.pick(1, 4), r.pick(1, 5)};
    return binary(r, s, s, sub);
  });
  p.emplace_back("mul", [](Rand& r) {
    Shape s{r.pick(1, 4), r.pick(1, 5)};
    return binary(r, s, s, mul);
  });
  p.emplace_back("affine", [](Rand& r) {
    return unary(r, {r.pick(1, 6)}, [](const Tensor& x) { return affine(x, -1.7, 0.3); });
  });
  p.emplace_back("matmul", [](Rand& r) {
    const std::size_t m = r.pick(1, 5), k = r.pick(1, 5), n = r.pick(1, 5);
    return binary(r, {m, k}, {k, n}, matmul);
  });
  p.emplace_back("transpose", [](Rand& r) { return unary(r, {r.pick(1, 4), r.pick(1, 4)}, transpose); });
  p.emplace_back("add_bias_lastdim", [](Rand& r) {
    const std::size_t n = r.pick(1, 4), d = r.pick(1, 5);
    return binary(r, {n, d}, {d}, add_bias_lastdim);
  });
  p.emplace_back("add_bias_channels", [](Rand& r) {
    const std::size_t c = r.pick(1, 3);
    return binary(r, {c, r.pick(1, 4), r.pick(1, 4)}, {c}, add_bias_channels);
  });
  p.emplace_back("linear", [](Rand& r) {
    const std::size_t n = r.pick(1, 4), i = r.pick(1, 4), o = r.pick(1, 4);
    Tensor x = r.tensor({n, i}), w = r.tensor({i, o}), b = r.tensor({o}), g = r.tensor({n, o});
    return Case{[=] { return weighted_sum(linear(x, w, b), g); }, {x, w, b}};
  });
  p.emplace_back("conv2d", [](Rand& r) {
    const std::size_t ci = r.pick(1, 3), co = r.pick(1, 3), k = r.pick(0, 1) * 2 + 1;
    const int stride = static_cast<int>(r.pick(1, 2)), pad = static_cast<int>(r.pick(0, k / 2));
    Tensor x = r.tensor({ci, r.pick(k, 6), r.pick(k, 6)}), w = r.tensor({co, ci, k, k}), b = r.tensor({co});
    Tensor g = r.tensor(conv2d(x, w, b, stride, pad).shape());
    return Case{[=] { return weighted_sum(conv2d(x, w, b, stride, pad), g); }, {x, w, b}};
  });
  p.emplace_back("pixel_shuffle", [](Rand& r) {
    const int f = static_cast<int>(r.pick(1, 3));
    return unary(r, {r.pick(1, 2) * static_cast<std::size_t>(f * f), r.pick(1, 3), r.pick(1, 3)},
                 [f](const Tensor& x) { return pixel_shuffle(x, f); });
  });
  p.emplace_back("pixel_unshuffle", [](Rand& r) {
    const std::size_t f = r.pick(1, 3);
    return unary(r, {r.pick(1, 2), f * r.pick(1, 3), f * r.pick(1, 3)},
                 [f](const Tensor& x) { return pixel_unshuffle(x, static_cast<int>(f)); });
  });
  p.emplace_back("layer_norm", [](Rand& r) {
    const std::size_t n = r.pick(1, 4), d = r.pick(2, 6);
    Tensor x = r.tensor({n, d}, -2.0, 2.0), gm = r.tensor({d}), bt = r.tensor({d}), g = r.tensor({n, d});
    return Case{[=] { return weighted_sum(layer_norm(x, gm, bt, 1e-6), g); }, {x, gm, bt}};
  });
  p.emplace_back("softmax", [](Rand& r) {
    return unary(r, {r.pick(1, 4), r.pick(1, 6)}, softmax_lastdim, -3.0, 3.0);
  });
  p.emplace_back("relu", [](Rand& r) { return unary(r, {r.pick(1, 4), r.pick(1, 6)}, relu); });
  p.emplace_back("gelu", [](Rand& r) { return unary(r, {r.pick(1, 4), r.pick(1, 6)}, gelu, -3.0, 3.0); });
  p.emplace_back("sigmoid", [](Rand& r) { return unary(r, {r.pick(1, 4), r.pick(1, 6)}, sigmoid, -4.0, 4.0); });
  p.emplace_back("grid_sample_bilinear", [](Rand& r) {
    const std::size_t c = r.pick(1, 3), h = r.pick(2, 5), w = r.pick(2, 5), n = r.pick(1, 8);
    Tensor img = r.tensor({c, h, w});
    // Output is linear in the image, so any coordinates give a smooth check.
    Tensor coords = r.tensor({n, 2}, -1.5, static_cast<double>(std::max(h, w)) + 0.5);
    Tensor g = r.tensor({c, n});
    return Case{[=] { return weighted_sum(grid_sample_bilinear(img, coords, Border::wrap, Border::clamp), g); },
                {img}};
  });
  p.emplace_back("upsample_bilinear", [](Rand& r) {
    const int f = static_cast<int>(r.pick(2, 4));
    return unary(r, {r.pick(1, 2), r.pick(1, 4), r.pick(1, 4)},
                 [f](const Tensor& x) { return upsample_bilinear(x, f); });
  });
  p.emplace_back("reshape", [](Rand& r) {
    const std::size_t a = r.pick(1, 4), b = r.pick(1, 4);
    return unary(r, {a, b}, [a, b](const Tensor& x) { return reshape(x, {b, a}); });
  });
  p.emplace_back("concat", [](Rand& r) {
    const std::size_t axis = r.pick(0, 1), n = r.pick(1, 3), m = r.pick(1, 3);
    Shape sa{n, m}, sb{n, m};
    sb[axis] = r.pick(1, 3);
    return binary(r, sa, sb, [axis](const Tensor& a, const Tensor& b) { return concat({a, b}, axis); });
  });
  p.emplace_back("slice", [](Rand& r) {
    const std::size_t n = r.pick(2, 6), start = r.pick(0, n - 1), len = r.pick(1, n - start);
    return unary(r, {r.pick(1, 3), n}, [start, len](const Tensor& x) { return slice(x, 1, start, len); });
  });
  p.emplace_back("gather", [](Rand& r) {
    const std::size_t n = r.pick(1, 6), m = r.pick(1, 8);
    std::vector<std::size_t> idx(m);
    for (auto& i : idx) i = r.pick(0, n - 1);
    return unary(r, {n}, [idx, m](const Tensor& x) { return gather(x, idx, {m}); });
  });
  p.emplace_back("sum", [](Rand& r) { return unary(r, {r.pick(1, 4), r.pick(1, 4)}, sum); });
  p.emplace_back("mean", [](Rand& r) { return unary(r, {r.pick(1, 4), r.pick(1, 4)}, mean); });
  p.emplace_back("berhu_loss", [](Rand& r) {
    const Shape s{1, r.pick(2, 5), r.pick(2, 5)};
    Tensor gt = r.tensor(s, 0.5, 3.0);
    auto g = gt.mutable_data();
    g[0] = 0.0;  // one invalid pixel
    Tensor pred = r.tensor(s, 0.0, 3.5);
    // Keep residuals away from the BerHu kinks at 0 and ±T.
    auto pd = pred.mutable_data();
    for (std::size_t i = 0; i < pd.size(); ++i) {
      const double d = std::abs(g[i] - pd[i]);
      if (d < 1e-3 || std::abs(d - kBerhuThreshold) < 1e-3) pd[i] += 0.01;
    }
    const ValidityMask mask = validity_mask(gt);
    return Case{[=] { return berhu_loss(pred, gt, mask, kBerhuThreshold); }, {pred}};
  });
  p.emplace_back("equirect_to_cubemap", [](Rand& r) {
    const std::size_t h = 2 * r.pick(1, 3);
    Tensor img = r.tensor({r.pick(1, 2), h, 2 * h});
    Tensor g = r.tensor(resample_equirect_to_cubemap(img).faces().shape());
    return Case{[=] { return weighted_sum(resample_equirect_to_cubemap(img).faces(), g); }, {img}};
  });
  return p;
}

double psnr(const std::vector<double>& a, const std::vector<double>& b) {
  double se = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) se += (a[i] - b[i]) * (a[i] - b[i]);
  const double mse = se / static_cast<double>(a.size());
  return mse == 0.0 ? INFINITY : 10.0 * std::log10(1.0 / mse);
}

std::string sci(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

}  // namespace

std::vector<CheckOutcome> primitive_gradient_checks(int cases, std::uint64_t seed, double tol) {
  std::vector<CheckOutcome> out;
  Rand rng(seed);
  for (const auto& [name, build] : primitives()) {
    CheckOutcome o{"grad/" + name, true, 0.0, ""};
    for (int c = 0; c < cases; ++c) {
      Case cs = build(rng);
      for (std::size_t i = 0; i < cs.inputs.size(); ++i) {
        const GradCheckResult r = gradient_check(cs.f, cs.inputs[i]);
        o.value = std::max(o.value, r.finite ? r.max_rel_error : INFINITY);
        if (!r.passed(tol)) o.passed = false;
      }
    }
    o.detail = std::to_string(cases) + " cases, max rel error " + sci(o.value);
    out.push_back(std::move(o));
  }
  return out;
}

double band_limited_pattern(double x, double y, double z, int channel) {
  switch (channel % 3) {
    case 0: return 0.5 + 0.25 * x + 0.15 * y * z;
    case 1: return 0.5 + 0.2 * y + 0.1 * (x * x - z * z);
    default: return 0.5 + 0.3 * z * x - 0.1 * y;
  }
}

std::vector<CheckOutcome> projection_checks(int height) {
  std::vector<CheckOutcome> out;
  const int width = 2 * height;

  double px_err = 0.0, dir_err = 0.0;
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      const auto d = dir_from_equirect(u, v, width, height);
      const auto e = equirect_from_dir(d, width, height);
      px_err = std::max({px_err, std::abs(e.u - u), std::abs(e.v - v)});
      const auto fc = face_coords_from_dir(d);
      const auto d2 = dir_from_face_coords(fc.face, fc.a, fc.b);
      dir_err = std::max({dir_err, std::abs(d2.x - d.x), std::abs(d2.y - d.y), std::abs(d2.z - d.z)});
    }
  }
  out.push_back({"projection/equirect_roundtrip", px_err < 1e-9, px_err, "max pixel error " + sci(px_err)});
  out.push_back({"projection/face_roundtrip", dir_err < 1e-12, dir_err, "max direction error " + sci(dir_err)});

  std::vector<double> img(3 * static_cast<std::size_t>(height * width));
  const std::size_t plane = static_cast<std::size_t>(height * width);
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      const auto d = dir_from_equirect(u, v, width, height);
      for (int c = 0; c < 3; ++c) {
        img[c * plane + static_cast<std::size_t>(v * width + u)] = band_limited_pattern(d.x, d.y, d.z, c);
      }
    }
  }
  Tensor eq({3, static_cast<std::size_t>(height), static_cast<std::size_t>(width)}, img);
  Tensor back;
  {
    Tape::Pause pause;
    back = resample_cubemap_to_equirect(resample_equirect_to_cubemap(eq), height);
  }
  const auto b = back.data();
  const double p = psnr(img, std::vector<double>(b.begin(), b.end()));
  out.push_back({"projection/e2c_c2e_psnr", p > 40.0, p, "PSNR " + std::to_string(p) + " dB at H=" + std::to_string(height)});
  return out;
}

}  // namespace glpd
