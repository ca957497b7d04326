#include "glpd/ops.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

namespace glpd {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  }
}

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                     shape_str(t.shape()));
  }
}

Tensor make_output(Shape shape, std::vector<double> data) { return Tensor(std::move(shape), std::move(data)); }

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.size());
  auto da = a.data(), db = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = da[i] + db[i];
  Tensor y = make_output(a.shape(), std::move(out));
  Tape::record({a, b}, y, [a, b, y](GradStore& gs) {
    auto g = gs.get(y);
    if (a.requires_grad()) {
      auto ga = gs.acc(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (b.requires_grad()) {
      auto gb = gs.acc(b);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
    }
  });
  return y;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<double> out(a.size());
  auto da = a.data(), db = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = da[i] - db[i];
  Tensor y = make_output(a.shape(), std::move(out));
  Tape::record({a, b}, y, [a, b, y](GradStore& gs) {
    auto g = gs.get(y);
    if (a.requires_grad()) {
      auto ga = gs.acc(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (b.requires_grad()) {
      auto gb = gs.acc(b);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  });
  return y;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<double> out(a.size());
  auto da = a.data(), db = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = da[i] * db[i];
  Tensor y = make_output(a.shape(), std::move(out));
  Tape::record({a, b}, y, [a, b, y](GradStore& gs) {
    auto g = gs.get(y);
    if (a.requires_grad()) {
      auto ga = gs.acc(a);
      auto db = b.data();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * db[i];
    }
    if (b.requires_grad()) {
      auto gb = gs.acc(b);
      auto da = a.data();
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * da[i];
    }
  });
  return y;
}

Tensor affine(const Tensor& x, double scale, double shift) {
  std::vector<double> out(x.size());
  auto dx = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = scale * dx[i] + shift;
  Tensor y = make_output(x.shape(), std::move(out));
  Tape::record({x}, y, [x, y, scale](GradStore& gs) {
    auto g = gs.get(y);
    auto gx = gs.acc(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += scale * g[i];
  });
  return y;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw ShapeError("matmul: inner dims differ " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  }
  std::vector<double> out(m * n, 0.0);
  auto da = a.data(), db = b.data();
  for (std::size_t i = 0; i < m; ++i) {
    double* row = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = da[i * k + p];
      const double* brow = db.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += av * brow[j];
    }
  }
  Tensor y = make_output({m, n}, std::move(out));
  Tape::record({a, b}, y, [a, b, y, m, k, n](GradStore& gs) {
    auto g = gs.get(y);
    if (a.requires_grad()) {
      auto ga = gs.acc(a);
      auto db = b.data();
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          double s = 0.0;
          for (std::size_t j = 0; j < n; ++j) s += g[i * n + j] * db[p * n + j];
          ga[i * k + p] += s;
        }
      }
    }
    if (b.requires_grad()) {
      auto gb = gs.acc(b);
      auto da = a.data();
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          const double av = da[i * k + p];
          for (std::size_t j = 0; j < n; ++j) gb[p * n + j] += av * g[i * n + j];
        }
      }
    }
  });
  return y;
}

Tensor transpose(const Tensor& a) {
  require_rank(a, 2, "transpose");
  const std::size_t m = a.dim(0), n = a.dim(1);
  std::vector<double> out(m * n);
  auto da = a.data();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = da[i * n + j];
  Tensor y = make_output({n, m}, std::move(out));
  Tape::record({a}, y, [a, y, m, n](GradStore& gs) {
    auto g = gs.get(y);
    auto ga = gs.acc(a);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) ga[i * n + j] += g[j * m + i];
  });
  return y;
}

Tensor add_bias_lastdim(const Tensor& x, const Tensor& b) {
  require_rank(b, 1, "add_bias_lastdim");
  if (x.rank() == 0 || x.shape().back() != b.dim(0)) {
    throw ShapeError("add_bias_lastdim: bias " + shape_str(b.shape()) + " vs input " + shape_str(x.shape()));
  }
  const std::size_t d = b.dim(0);
  std::vector<double> out(x.size());
  auto dx = x.data(), bias = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = dx[i] + bias[i % d];
  Tensor y = make_output(x.shape(), std::move(out));
  Tape::record({x, b}, y, [x, b, y, d](GradStore& gs) {
    auto g = gs.get(y);
    if (x.requires_grad()) {
      auto gx = gs.acc(x);
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    }
    if (b.requires_grad()) {
      auto gb = gs.acc(b);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i % d] += g[i];
    }
  });
  return y;
}

Tensor add_bias_channels(const Tensor& x, const Tensor& b) {
  require_rank(b, 1, "add_bias_channels");
  if (x.rank() == 0 || x.dim(0) != b.dim(0)) {
    throw ShapeError("add_bias_channels: bias " + shape_str(b.shape()) + " vs input " + shape_str(x.shape()));
  }
  const std::size_t c = b.dim(0), inner = x.size() / c;
  std::vector<double> out(x.size());
  auto dx = x.data(), bias = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = dx[i] + bias[i / inner];
  Tensor y = make_output(x.shape(), std::move(out));
  Tape::record({x, b}, y, [x, b, y, inner](GradStore& gs) {
    auto g = gs.get(y);
    if (x.requires_grad()) {
      auto gx = gs.acc(x);
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    }
    if (b.requires_grad()) {
      auto gb = gs.acc(b);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i / inner] += g[i];
    }
  });
  return y;
}

Tensor linear(const Tensor& x, const Tensor& w, const std::optional<Tensor>& b) {
  Tensor y = matmul(x, w);
  return b ? add_bias_lastdim(y, *b) : y;
}

Tensor conv2d(const Tensor& x, const Tensor& w, const std::optional<Tensor>& bias, int stride, int pad) {
  require_rank(x, 3, "conv2d");
  require_rank(w, 4, "conv2d weight");
  const std::size_t cin = x.dim(0);
  const long h = static_cast<long>(x.dim(1)), wd = static_cast<long>(x.dim(2));
  const std::size_t cout = w.dim(0);
  const long k = static_cast<long>(w.dim(2));
  if (w.dim(1) != cin) {
    throw ShapeError("conv2d: weight " + shape_str(w.shape()) + " does not match input " + shape_str(x.shape()));
  }
  if (w.dim(3) != w.dim(2) || k % 2 == 0) throw ShapeError("conv2d: kernel must be square and odd");
  if (stride != 1 && stride != 2) throw ContractError("conv2d: stride must be 1 or 2");
  if (pad < 0) throw ContractError("conv2d: negative padding");
  if (h + 2 * pad < k || wd + 2 * pad < k) {
    throw ShapeError("conv2d: kernel " + std::to_string(k) + " larger than padded input " + shape_str(x.shape()));
  }
  if (bias && (bias->rank() != 1 || bias->dim(0) != cout)) throw ShapeError("conv2d: bias shape");
  const long s = stride, p = pad;
  const long oh = (h + 2 * p - k) / s + 1, ow = (wd + 2 * p - k) / s + 1;
  const std::size_t plane = static_cast<std::size_t>(oh * ow);

  // Valid output column range for a given kernel column kx.
  auto ox_range = [=](long kx) {
    const long lo = p - kx > 0 ? (p - kx + s - 1) / s : 0;
    const long top = wd - 1 + p - kx;
    const long hi = top < 0 ? -1 : std::min<long>(ow - 1, top / s);
    return std::pair{lo, hi};
  };

  std::vector<double> out(cout * plane, 0.0);
  auto dx = x.data(), dw = w.data();
  for (std::size_t co = 0; co < cout; ++co) {
    double* o = out.data() + co * plane;
    if (bias) std::fill(o, o + plane, bias->data()[co]);
    for (std::size_t ci = 0; ci < cin; ++ci) {
      const double* in = dx.data() + ci * static_cast<std::size_t>(h * wd);
      for (long ky = 0; ky < k; ++ky) {
        for (long kx = 0; kx < k; ++kx) {
          const double wv = dw[((co * cin + ci) * k + ky) * k + kx];
          const auto [lo, hi] = ox_range(kx);
          for (long oy = 0; oy < oh; ++oy) {
            const long iy = oy * s + ky - p;
            if (iy < 0 || iy >= h) continue;
            const double* irow = in + iy * wd;
            double* orow = o + oy * ow;
            for (long ox = lo; ox <= hi; ++ox) orow[ox] += wv * irow[ox * s + kx - p];
          }
        }
      }
    }
  }

  Tensor y = make_output({cout, static_cast<std::size_t>(oh), static_cast<std::size_t>(ow)}, std::move(out));
  std::vector<Tensor> inputs{x, w};
  if (bias) inputs.push_back(*bias);
  Tape::record(std::move(inputs), y, [=](GradStore& gs) {
    auto g = gs.get(y);
    auto dx = x.data(), dw = w.data();
    if (bias && bias->requires_grad()) {
      auto gb = gs.acc(*bias);
      for (std::size_t co = 0; co < cout; ++co) {
        double acc = 0.0;
        for (std::size_t i = 0; i < plane; ++i) acc += g[co * plane + i];
        gb[co] += acc;
      }
    }
    const bool need_x = x.requires_grad(), need_w = w.requires_grad();
    std::span<double> gx = need_x ? gs.acc(x) : std::span<double>{};
    std::span<double> gw = need_w ? gs.acc(w) : std::span<double>{};
    for (std::size_t co = 0; co < cout; ++co) {
      const double* go = g.data() + co * plane;
      for (std::size_t ci = 0; ci < cin; ++ci) {
        const std::size_t in_off = ci * static_cast<std::size_t>(h * wd);
        for (long ky = 0; ky < k; ++ky) {
          for (long kx = 0; kx < k; ++kx) {
            const std::size_t widx = ((co * cin + ci) * k + ky) * k + kx;
            const double wv = dw[widx];
            const auto [lo, hi] = ox_range(kx);
            double wacc = 0.0;
            for (long oy = 0; oy < oh; ++oy) {
              const long iy = oy * s + ky - p;
              if (iy < 0 || iy >= h) continue;
              const double* grow = go + oy * ow;
              const std::size_t row_off = in_off + static_cast<std::size_t>(iy * wd);
              if (need_x) {
                double* gxrow = gx.data() + row_off;
                for (long ox = lo; ox <= hi; ++ox) gxrow[ox * s + kx - p] += wv * grow[ox];
              }
              if (need_w) {
                const double* irow = dx.data() + row_off;
                for (long ox = lo; ox <= hi; ++ox) wacc += grow[ox] * irow[ox * s + kx - p];
              }
            }
            if (need_w) gw[widx] += wacc;
          }
        }
      }
    }
  });
  return y;
}

Tensor pixel_shuffle(const Tensor& x, int r) {
  require_rank(x, 3, "pixel_shuffle");
  if (r < 1) throw ContractError("pixel_shuffle: r must be >= 1");
  const std::size_t rr = static_cast<std::size_t>(r) * r;
  if (x.dim(0) % rr != 0) {
    throw ShapeError("pixel_shuffle: channels " + std::to_string(x.dim(0)) + " not divisible by r^2=" +
                     std::to_string(rr));
  }
  const std::size_t c = x.dim(0) / rr, h = x.dim(1), w = x.dim(2), R = r;
  std::vector<std::size_t> index(x.size());
  const std::size_t oh = h * R, ow = w * R;
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t oy = 0; oy < oh; ++oy)
      for (std::size_t ox = 0; ox < ow; ++ox) {
        const std::size_t src_c = ch * rr + (oy % R) * R + (ox % R);
        index[(ch * oh + oy) * ow + ox] = (src_c * h + oy / R) * w + ox / R;
      }
  return gather(x, std::move(index), {c, oh, ow});
}

Tensor pixel_unshuffle(const Tensor& x, int r) {
  require_rank(x, 3, "pixel_unshuffle");
  if (r < 1) throw ContractError("pixel_unshuffle: r must be >= 1");
  const std::size_t R = r;
  if (x.dim(1) % R != 0 || x.dim(2) % R != 0) throw ShapeError("pixel_unshuffle: spatial dims not divisible by r");
  const std::size_t c = x.dim(0), h = x.dim(1) / R, w = x.dim(2) / R, rr = R * R;
  std::vector<std::size_t> index(x.size());
  for (std::size_t oc = 0; oc < c * rr; ++oc)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t xx = 0; xx < w; ++xx) {
        const std::size_t ch = oc / rr, i = (oc % rr) / R, j = oc % R;
        index[(oc * h + y) * w + xx] = (ch * h * R + y * R + i) * (w * R) + xx * R + j;
      }
  return gather(x, std::move(index), {c * rr, h, w});
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  require_rank(gamma, 1, "layer_norm gamma");
  require_rank(beta, 1, "layer_norm beta");
  if (eps <= 0.0) throw ContractError("layer_norm: eps must be positive");
  const std::size_t d = gamma.dim(0);
  if (x.rank() == 0 || x.shape().back() != d || beta.dim(0) != d) {
    throw ShapeError("layer_norm: last dim of " + shape_str(x.shape()) + " vs gamma " + shape_str(gamma.shape()));
  }
  const std::size_t rows = x.size() / d;
  auto dx = x.data(), dg = gamma.data(), db = beta.data();
  auto xhat = std::make_shared<std::vector<double>>(x.size());
  auto inv_std = std::make_shared<std::vector<double>>(rows);
  std::vector<double> out(x.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = dx.data() + r * d;
    double mu = 0.0;
    for (std::size_t i = 0; i < d; ++i) mu += in[i];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t i = 0; i < d; ++i) var += (in[i] - mu) * (in[i] - mu);
    var /= static_cast<double>(d);
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[r] = is;
    for (std::size_t i = 0; i < d; ++i) {
      const double xh = (in[i] - mu) * is;
      (*xhat)[r * d + i] = xh;
      out[r * d + i] = dg[i] * xh + db[i];
    }
  }
  Tensor y = make_output(x.shape(), std::move(out));
  Tape::record({x, gamma, beta}, y, [=](GradStore& gs) {
    auto g = gs.get(y);
    auto dg = gamma.data();
    if (gamma.requires_grad()) {
      auto gg = gs.acc(gamma);
      for (std::size_t i = 0; i < g.size(); ++i) gg[i % d] += g[i] * (*xhat)[i];
    }
    if (beta.requires_grad()) {
      auto gb = gs.acc(beta);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i % d] += g[i];
    }
    if (x.requires_grad()) {
      auto gx = gs.acc(x);
      const double inv_d = 1.0 / static_cast<double>(d);
      for (std::size_t r = 0; r < rows; ++r) {
        double m1 = 0.0, m2 = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
          const double gxh = g[r * d + i] * dg[i];
          m1 += gxh;
          m2 += gxh * (*xhat)[r * d + i];
        }
        m1 *= inv_d;
        m2 *= inv_d;
        for (std::size_t i = 0; i < d; ++i) {
          const double gxh = g[r * d + i] * dg[i];
          gx[r * d + i] += (*inv_std)[r] * (gxh - m1 - (*xhat)[r * d + i] * m2);
        }
      }
    }
  });
  return y;
}

Tensor softmax_lastdim(const Tensor& x) {
  if (x.rank() == 0) throw ShapeError("softmax_lastdim: scalar input");
  const std::size_t n = x.shape().back(), rows = x.size() / n;
  auto dx = x.data();
  std::vector<double> out(x.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = dx.data() + r * n;
    double* o = out.data() + r * n;
    const double mx = *std::max_element(in, in + n);
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) z += (o[i] = std::exp(in[i] - mx));
    for (std::size_t i = 0; i < n; ++i) o[i] /= z;
  }
  Tensor y = make_output(x.shape(), std::move(out));
  Tape::record({x}, y, [x, y, n, rows](GradStore& gs) {
    auto g = gs.get(y);
    auto dy = y.data();
    auto gx = gs.acc(x);
    for (std::size_t r = 0; r < rows; ++r) {
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += g[r * n + i] * dy[r * n + i];
      for (std::size_t i = 0; i < n; ++i) gx[r * n + i] += dy[r * n + i] * (g[r * n + i] - dot);
    }
  });
  return y;
}

namespace {
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;
}  // namespace

double gelu_scalar(double x) { return 0.5 * x * (1.0 + std::tanh(kGeluC * (x + kGeluA * x * x * x))); }

double gelu_derivative(double x) {
  const double t = std::tanh(kGeluC * (x + kGeluA * x * x * x));
  return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * kGeluC * (1.0 + 3.0 * kGeluA * x * x);
}

Tensor activation(const Tensor& x, Activation kind) {
  auto dx = x.data();
  std::vector<double> out(x.size());
  switch (kind) {
    case Activation::relu:
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = dx[i] <= 0.0 ? 0.0 : dx[i];  // NaN passes through
      break;
    case Activation::gelu:
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = gelu_scalar(dx[i]);
      break;
    case Activation::sigmoid:
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-dx[i]));
      break;
  }
  Tensor y = make_output(x.shape(), std::move(out));
  Tape::record({x}, y, [x, y, kind](GradStore& gs) {
    auto g = gs.get(y);
    auto gx = gs.acc(x);
    auto dx = x.data();
    auto dy = y.data();
    switch (kind) {
      case Activation::relu:
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += dx[i] > 0.0 ? g[i] : 0.0;
        break;
      case Activation::gelu:
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * gelu_derivative(dx[i]);
        break;
      case Activation::sigmoid:
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * dy[i] * (1.0 - dy[i]);
        break;
    }
  });
  return y;
}

namespace {

struct Tap4 {
  std::size_t offset[4];
  double weight[4];
};

long resolve(long i, long n, Border mode) {
  if (mode == Border::wrap) {
    long m = i % n;
    return m < 0 ? m + n : m;
  }
  return std::clamp<long>(i, 0, n - 1);
}

}  // namespace

Tensor grid_sample_bilinear(const Tensor& img, const Tensor& coords, Border border_x, Border border_y) {
  require_rank(img, 3, "grid_sample_bilinear");
  require_rank(coords, 2, "grid_sample_bilinear coords");
  if (coords.dim(1) != 2) throw ShapeError("grid_sample_bilinear: coords must be N×2");
  const std::size_t c = img.dim(0);
  const long h = static_cast<long>(img.dim(1)), w = static_cast<long>(img.dim(2));
  const std::size_t n = coords.dim(0), plane = static_cast<std::size_t>(h * w);
  auto dc = coords.data();
  auto taps = std::make_shared<std::vector<Tap4>>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = dc[2 * i], v = dc[2 * i + 1];
    const double fu = std::floor(u), fv = std::floor(v);
    const double ax = u - fu, ay = v - fv;
    const long x0 = resolve(static_cast<long>(fu), w, border_x), x1 = resolve(static_cast<long>(fu) + 1, w, border_x);
    const long y0 = resolve(static_cast<long>(fv), h, border_y), y1 = resolve(static_cast<long>(fv) + 1, h, border_y);
    Tap4& t = (*taps)[i];
    t.offset[0] = static_cast<std::size_t>(y0 * w + x0);
    t.offset[1] = static_cast<std::size_t>(y0 * w + x1);
    t.offset[2] = static_cast<std::size_t>(y1 * w + x0);
    t.offset[3] = static_cast<std::size_t>(y1 * w + x1);
    t.weight[0] = (1.0 - ax) * (1.0 - ay);
    t.weight[1] = ax * (1.0 - ay);
    t.weight[2] = (1.0 - ax) * ay;
    t.weight[3] = ax * ay;
  }
  auto di = img.data();
  std::vector<double> out(c * n);
  for (std::size_t ch = 0; ch < c; ++ch) {
    const double* src = di.data() + ch * plane;
    double* o = out.data() + ch * n;
    for (std::size_t i = 0; i < n; ++i) {
      const Tap4& t = (*taps)[i];
      o[i] = t.weight[0] * src[t.offset[0]] + t.weight[1] * src[t.offset[1]] + t.weight[2] * src[t.offset[2]] +
             t.weight[3] * src[t.offset[3]];
    }
  }
  Tensor y = make_output({c, n}, std::move(out));
  Tape::record({img}, y, [img, y, taps, c, n, plane](GradStore& gs) {
    auto g = gs.get(y);
    auto gi = gs.acc(img);
    for (std::size_t ch = 0; ch < c; ++ch) {
      double* dst = gi.data() + ch * plane;
      const double* go = g.data() + ch * n;
      for (std::size_t i = 0; i < n; ++i) {
        const Tap4& t = (*taps)[i];
        for (int q = 0; q < 4; ++q) dst[t.offset[q]] += t.weight[q] * go[i];
      }
    }
  });
  return y;
}

Tensor upsample_bilinear(const Tensor& x, int factor) {
  require_rank(x, 3, "upsample_bilinear");
  if (factor < 1) throw ContractError("upsample_bilinear: factor must be >= 1");
  const std::size_t c = x.dim(0), oh = x.dim(1) * factor, ow = x.dim(2) * factor;
  std::vector<double> coords(oh * ow * 2);
  const double f = factor;
  for (std::size_t i = 0; i < oh; ++i)
    for (std::size_t j = 0; j < ow; ++j) {
      coords[2 * (i * ow + j)] = (static_cast<double>(j) + 0.5) / f - 0.5;
      coords[2 * (i * ow + j) + 1] = (static_cast<double>(i) + 0.5) / f - 0.5;
    }
  Tensor grid({oh * ow, 2}, std::move(coords));
  return reshape(grid_sample_bilinear(x, grid, Border::clamp, Border::clamp), {c, oh, ow});
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (numel(shape) != x.size()) {
    throw ShapeError("reshape: " + shape_str(x.shape()) + " -> " + shape_str(shape));
  }
  Tensor y = make_output(std::move(shape), std::vector<double>(x.data().begin(), x.data().end()));
  Tape::record({x}, y, [x, y](GradStore& gs) {
    auto g = gs.get(y);
    auto gx = gs.acc(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
  });
  return y;
}

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
  if (parts.empty()) throw ContractError("concat: no inputs");
  const Shape& ref = parts.front().shape();
  if (axis >= ref.size()) throw ShapeError("concat: axis out of range");
  Shape out_shape = ref;
  out_shape[axis] = 0;
  for (const auto& t : parts) {
    if (t.rank() != ref.size()) throw ShapeError("concat: rank mismatch");
    for (std::size_t d = 0; d < ref.size(); ++d) {
      if (d != axis && t.dim(d) != ref[d]) {
        throw ShapeError("concat: " + shape_str(t.shape()) + " vs " + shape_str(ref));
      }
    }
    out_shape[axis] += t.dim(axis);
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= ref[d];
  for (std::size_t d = axis + 1; d < ref.size(); ++d) inner *= ref[d];
  const std::size_t out_row = out_shape[axis] * inner;
  std::vector<double> out(numel(out_shape));
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const auto& t : parts) {
    offsets.push_back(off);
    const std::size_t row = t.dim(axis) * inner;
    auto src = t.data();
    for (std::size_t o = 0; o < outer; ++o)
      std::copy_n(src.data() + o * row, row, out.data() + o * out_row + off);
    off += row;
  }
  Tensor y = make_output(out_shape, std::move(out));
  Tape::record(parts, y, [parts, y, offsets, outer, inner, out_row, axis](GradStore& gs) {
    auto g = gs.get(y);
    for (std::size_t p = 0; p < parts.size(); ++p) {
      if (!parts[p].requires_grad()) continue;
      const std::size_t row = parts[p].dim(axis) * inner;
      auto gp = gs.acc(parts[p]);
      for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t i = 0; i < row; ++i) gp[o * row + i] += g[o * out_row + offsets[p] + i];
    }
  });
  return y;
}

Tensor slice(const Tensor& x, std::size_t axis, std::size_t start, std::size_t length) {
  if (axis >= x.rank()) throw ShapeError("slice: axis out of range");
  if (length == 0 || start + length > x.dim(axis)) {
    throw ShapeError("slice: [" + std::to_string(start) + ", +" + std::to_string(length) + ") out of " +
                     shape_str(x.shape()));
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= x.dim(d);
  for (std::size_t d = axis + 1; d < x.rank(); ++d) inner *= x.dim(d);
  Shape out_shape = x.shape();
  out_shape[axis] = length;
  std::vector<std::size_t> index;
  index.reserve(numel(out_shape));
  const std::size_t in_row = x.dim(axis) * inner;
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t i = 0; i < length * inner; ++i) index.push_back(o * in_row + start * inner + i);
  return gather(x, std::move(index), std::move(out_shape));
}

Tensor gather(const Tensor& x, std::vector<std::size_t> index, Shape out_shape) {
  if (numel(out_shape) != index.size()) throw ShapeError("gather: index length does not match output shape");
  auto dx = x.data();
  std::vector<double> out(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= dx.size()) throw ShapeError("gather: index out of range");
    out[i] = dx[index[i]];
  }
  Tensor y = make_output(std::move(out_shape), std::move(out));
  if (Tape::current() != nullptr && x.requires_grad()) {
    auto idx = std::make_shared<std::vector<std::size_t>>(std::move(index));
    Tape::record({x}, y, [x, y, idx](GradStore& gs) {
      auto g = gs.get(y);
      auto gx = gs.acc(x);
      for (std::size_t i = 0; i < g.size(); ++i) gx[(*idx)[i]] += g[i];
    });
  }
  return y;
}

Tensor sum(const Tensor& x) {
  double s = 0.0;
  for (double v : x.data()) s += v;
  Tensor y = Tensor::scalar(s);
  Tape::record({x}, y, [x, y](GradStore& gs) {
    const double g = gs.get(y)[0];
    auto gx = gs.acc(x);
    for (auto& v : gx) v += g;
  });
  return y;
}

Tensor mean(const Tensor& x) { return affine(sum(x), 1.0 / static_cast<double>(x.size())); }

}  // namespace glpd
