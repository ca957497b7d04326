#pragma once

#include <optional>
#include <vector>

#include "glpd/tensor.hpp"

namespace glpd {

// Differentiable primitives. Every op records itself on the active tape when
// any input requires a gradient. Shapes must agree exactly; the only
// broadcasting is the explicit bias adds.

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
/// scale * x + shift, elementwise.
Tensor affine(const Tensor& x, double scale, double shift = 0.0);

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

/// x[..., d] + b[d]
Tensor add_bias_lastdim(const Tensor& x, const Tensor& b);
/// x[C, ...] + b[C]
Tensor add_bias_channels(const Tensor& x, const Tensor& b);
/// x[N, k] · w[k, n] + b[n]
Tensor linear(const Tensor& x, const Tensor& w, const std::optional<Tensor>& b);

/// Cross-correlation with zero padding. x: C_in×H×W, w: C_out×C_in×k×k.
Tensor conv2d(const Tensor& x, const Tensor& w, const std::optional<Tensor>& bias, int stride, int pad);

/// C·r²×H×W -> C×rH×rW; out[c, y·r+i, x·r+j] = in[c·r² + i·r + j, y, x].
Tensor pixel_shuffle(const Tensor& x, int r);
Tensor pixel_unshuffle(const Tensor& x, int r);

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps = 1e-5);
Tensor softmax_lastdim(const Tensor& x);

enum class Activation { relu, gelu, sigmoid };
Tensor activation(const Tensor& x, Activation kind);
inline Tensor relu(const Tensor& x) { return activation(x, Activation::relu); }
inline Tensor gelu(const Tensor& x) { return activation(x, Activation::gelu); }
inline Tensor sigmoid(const Tensor& x) { return activation(x, Activation::sigmoid); }

/// tanh-approximated GELU: 0.5·x·(1 + tanh(√(2/π)·(x + 0.044715·x³))).
double gelu_scalar(double x);
double gelu_derivative(double x);

enum class Border { clamp, wrap };

/// Bilinear sampling of img (C×H×W) at continuous pixel coords (N×2, columns
/// x then y, pixel centers at integers). Gradients flow to img only.
Tensor grid_sample_bilinear(const Tensor& img, const Tensor& coords, Border border_x, Border border_y);

/// Bilinear resize by an integer factor on the half-pixel grid with clamped
/// borders, built on grid_sample_bilinear.
Tensor upsample_bilinear(const Tensor& x, int factor);

Tensor reshape(const Tensor& x, Shape shape);
Tensor concat(const std::vector<Tensor>& parts, std::size_t axis);
Tensor slice(const Tensor& x, std::size_t axis, std::size_t start, std::size_t length);
/// out.flat[i] = x.flat[index[i]]; backward scatters.
Tensor gather(const Tensor& x, std::vector<std::size_t> index, Shape out_shape);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

}  // namespace glpd
