#include "glpd/cvit.hpp"

#include <cmath>

#include "glpd/ops.hpp"

namespace glpd {

namespace {

std::size_t sz(int v) { return static_cast<std::size_t>(v); }

}  // namespace

int recover_factor(const ModelConfig& cfg, int level) {
  if (level < 1 || level > 4) throw ContractError("recover_scale: level must be in 1..4, got " + std::to_string(level));
  const int target_div = 1 << (level + 1);
  if (cfg.patch >= target_div) return cfg.patch / target_div;
  int n = 0;
  for (int d = cfg.patch; d < target_div; d *= 2) ++n;
  return -n;
}

CvitParams CvitParams::create(const ModelConfig& cfg, ParamInit& init, ParameterSet& set, const std::string& prefix) {
  cfg.validate();
  const std::size_t d = sz(cfg.dim), np = cfg.token_count();
  const std::size_t patch_len = sz(cfg.in_channels * cfg.patch * cfg.patch);
  const std::size_t hidden = d * sz(cfg.mlp_ratio);
  CvitParams p;

  p.embed.weight = set.add(prefix + "embed.weight", init.kaiming_uniform({patch_len, d}, patch_len));
  p.embed.bias = set.add(prefix + "embed.bias", Tensor::zeros({d}));
  p.embed.position = set.add(prefix + "embed.position", init.trunc_normal({np, d}, 0.02));

  for (int k = 0; k < cfg.blocks; ++k) {
    const std::string b = prefix + "block" + std::to_string(k + 1) + ".";
    BlockParams bp;
    bp.ln1_gamma = set.add(b + "ln1.gamma", Tensor::full({d}, 1.0));
    bp.ln1_beta = set.add(b + "ln1.beta", Tensor::zeros({d}));
    bp.qkv_w = set.add(b + "attn.qkv.weight", init.kaiming_uniform({d, 3 * d}, d));
    bp.qkv_b = set.add(b + "attn.qkv.bias", Tensor::zeros({3 * d}));
    bp.proj_w = set.add(b + "attn.proj.weight", Tensor::zeros({d, d}));
    bp.proj_b = set.add(b + "attn.proj.bias", Tensor::zeros({d}));
    bp.ln2_gamma = set.add(b + "ln2.gamma", Tensor::full({d}, 1.0));
    bp.ln2_beta = set.add(b + "ln2.beta", Tensor::zeros({d}));
    bp.fc1_w = set.add(b + "mlp.fc1.weight", init.kaiming_uniform({d, hidden}, d));
    bp.fc1_b = set.add(b + "mlp.fc1.bias", Tensor::zeros({hidden}));
    bp.fc2_w = set.add(b + "mlp.fc2.weight", Tensor::zeros({hidden, d}));
    bp.fc2_b = set.add(b + "mlp.fc2.bias", Tensor::zeros({d}));
    p.blocks.push_back(std::move(bp));
  }

  const std::size_t q = cfg.token_grid_h() * cfg.token_grid_w();
  for (int l = 1; l <= 4; ++l) {
    const std::string r = prefix + "level" + std::to_string(l) + ".";
    const std::size_t c = sz(cfg.level_channels[l - 1]);
    ReassembleParams& ra = p.reassemble[l - 1];
    ra.token_map = set.add(r + "reassemble.token_map", init.kaiming_uniform({q, np}, np));
    ra.channel_w = set.add(r + "reassemble.channel.weight", init.kaiming_uniform({d, c}, d));
    ra.channel_b = set.add(r + "reassemble.channel.bias", Tensor::zeros({c}));

    RecoverParams& rc = p.recover[l - 1];
    const int f = recover_factor(cfg, l);
    const std::size_t out_c = f > 1 ? c * sz(f * f) : c;
    rc.conv_w = set.add(r + "recover.conv.weight", init.kaiming_uniform({out_c, c, 1, 1}, c));
    rc.conv_b = set.add(r + "recover.conv.bias", Tensor::zeros({out_c}));
    for (int i = 0; i < -f; ++i) {
      const std::string n = r + "recover.down" + std::to_string(i + 1) + ".";
      rc.down_w.push_back(set.add(n + "weight", init.kaiming_uniform({c, c, 3, 3}, c * 9)));
      rc.down_b.push_back(set.add(n + "bias", Tensor::zeros({c})));
    }
  }
  return p;
}

TokenBatch patchify_and_embed(const CubemapTensor& cm, const ModelConfig& cfg, const PatchEmbedParams& params) {
  const std::size_t s = cm.face_size(), c = cm.channels(), p = sz(cfg.patch);
  if (p == 0 || s % p != 0) {
    throw ShapeError("patchify: face size " + std::to_string(s) + " not divisible by patch " + std::to_string(p));
  }
  const std::size_t g = s / p, n = 6 * g * g, len = c * p * p;
  if (params.weight.rank() != 2 || params.weight.dim(0) != len) {
    throw ShapeError("patchify: embedding weight " + shape_str(params.weight.shape()) + " expects patch length " +
                     std::to_string(len));
  }

  // Token row: face-major, then patch row, then patch column. Within a token
  // the layout is (channel, dy, dx).
  std::vector<std::size_t> index;
  index.reserve(n * len);
  for (std::size_t f = 0; f < 6; ++f)
    for (std::size_t py = 0; py < g; ++py)
      for (std::size_t px = 0; px < g; ++px)
        for (std::size_t ch = 0; ch < c; ++ch)
          for (std::size_t dy = 0; dy < p; ++dy)
            for (std::size_t dx = 0; dx < p; ++dx)
              index.push_back(((f * c + ch) * s + py * p + dy) * s + px * p + dx);
  Tensor patches = gather(cm.faces(), std::move(index), {n, len});

  Tensor tokens = linear(patches, params.weight, params.bias);
  if (params.position.shape() != tokens.shape()) {
    throw ShapeError("patchify: position embedding " + shape_str(params.position.shape()) + " vs tokens " +
                     shape_str(tokens.shape()));
  }
  return TokenBatch{add(tokens, params.position), 6, g};
}

TokenBatch transformer_block(const TokenBatch& t, const BlockParams& params, int heads, double ln_eps) {
  const Tensor& x = t.tokens;
  const std::size_t d = x.dim(1);
  if (heads <= 0 || d % static_cast<std::size_t>(heads) != 0) {
    throw ShapeError("transformer_block: width " + std::to_string(d) + " not divisible by heads");
  }
  const std::size_t dh = d / static_cast<std::size_t>(heads);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  Tensor qkv = linear(layer_norm(x, params.ln1_gamma, params.ln1_beta, ln_eps), params.qkv_w, params.qkv_b);
  std::vector<Tensor> outs;
  outs.reserve(static_cast<std::size_t>(heads));
  for (std::size_t h = 0; h < static_cast<std::size_t>(heads); ++h) {
    Tensor q = slice(qkv, 1, h * dh, dh);
    Tensor k = slice(qkv, 1, d + h * dh, dh);
    Tensor v = slice(qkv, 1, 2 * d + h * dh, dh);
    Tensor att = softmax_lastdim(affine(matmul(q, transpose(k)), scale));
    outs.push_back(matmul(att, v));
  }
  Tensor attn = linear(outs.size() == 1 ? outs[0] : concat(outs, 1), params.proj_w, params.proj_b);
  Tensor y = add(x, attn);

  Tensor hidden = gelu(linear(layer_norm(y, params.ln2_gamma, params.ln2_beta, ln_eps), params.fc1_w, params.fc1_b));
  Tensor out = add(y, linear(hidden, params.fc2_w, params.fc2_b));
  return TokenBatch{out, t.faces, t.grid};
}

Tensor reassemble(const TokenBatch& t, const ModelConfig& cfg, const ReassembleParams& params) {
  const std::size_t gh = cfg.token_grid_h(), gw = cfg.token_grid_w();
  if (params.token_map.rank() != 2 || params.token_map.dim(0) != gh * gw || params.token_map.dim(1) != t.count()) {
    throw ShapeError("reassemble: token map " + shape_str(params.token_map.shape()) + " vs " +
                     std::to_string(t.count()) + " tokens and a " + std::to_string(gh) + "x" + std::to_string(gw) +
                     " grid");
  }
  Tensor spatial = matmul(params.token_map, t.tokens);               // Q × d
  Tensor projected = linear(spatial, params.channel_w, params.channel_b);  // Q × C
  const std::size_t c = projected.dim(1);
  return reshape(transpose(projected), {c, gh, gw});
}

Tensor recover_scale(const Tensor& m, int level, const ModelConfig& cfg, const RecoverParams& params) {
  const int f = recover_factor(cfg, level);
  Tensor y = conv2d(m, params.conv_w, params.conv_b, 1, 0);
  if (f > 1) return pixel_shuffle(y, f);
  if (params.down_w.size() != static_cast<std::size_t>(f < 0 ? -f : 0)) {
    throw ContractError("recover_scale: expected " + std::to_string(-f) + " downscale convs for level " +
                        std::to_string(level));
  }
  for (std::size_t i = 0; i < params.down_w.size(); ++i) y = conv2d(y, params.down_w[i], params.down_b[i], 2, 1);
  return y;
}

FeaturePyramid cvit_forward(const CubemapTensor& cm, const ModelConfig& cfg, const CvitParams& params,
                            CvitTrace* trace) {
  if (params.blocks.size() != static_cast<std::size_t>(cfg.blocks)) {
    throw ContractError("cvit_forward: parameter block count does not match config");
  }
  TokenBatch t = patchify_and_embed(cm, cfg, params.embed);
  if (trace) trace->embedded = t;

  // Earliest tap feeds the finest level.
  std::array<Tensor, 4> tapped;
  std::size_t next = 0;
  for (int k = 1; k <= cfg.blocks && next < 4; ++k) {
    t = transformer_block(t, params.blocks[static_cast<std::size_t>(k - 1)], cfg.heads, cfg.ln_eps);
    while (next < 4 && cfg.taps[next] == k) tapped[next++] = t.tokens;
  }
  if (next != 4) throw ContractError("cvit_forward: taps not reached");
  if (trace) trace->tapped = tapped;

  FeaturePyramid out;
  for (int l = 1; l <= 4; ++l) {
    TokenBatch tb{tapped[l - 1], 6, t.grid};
    out.levels[l - 1] = recover_scale(reassemble(tb, cfg, params.reassemble[l - 1]), l, cfg, params.recover[l - 1]);
  }
  return out;
}

}  // namespace glpd
