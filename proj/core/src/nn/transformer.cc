// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#include "flespeech/nn/transformer.h"

#include <cmath>
#include <vector>

#include "flespeech/common/error.h"

namespace flespeech {
namespace nn {

namespace {

constexpr double kInitStd = 0.02;

void init_layer_norm(ParamStore& ps, const std::string& prefix, int dim) {
  ps.create_full(prefix + ".g", {dim}, 1.0);
  ps.create_full(prefix + ".b", {dim}, 0.0);
}

void init_linear(ParamStore& ps, const std::string& prefix, int in, int out,
                 Rng& rng) {
  ps.create_gaussian(prefix + ".w", {in, out}, rng, kInitStd);
  ps.create_full(prefix + ".b", {out}, 0.0);
}

Var linear(const ParamCtx& P, const std::string& prefix, const Var& x) {
  return add_rowvec(matmul(x, P(prefix + ".w")), P(prefix + ".b"));
}

Var layer_norm(const ParamCtx& P, const std::string& prefix, const Var& x) {
  return layer_norm_rows(x, P(prefix + ".g"), P(prefix + ".b"));
}

}  // namespace

void init_block(ParamStore& ps, const std::string& prefix,
                const BlockConfig& cfg, Rng& rng) {
  if (cfg.hidden % cfg.heads != 0) {
    throw DimensionMismatchError("hidden not divisible by heads");
  }
  init_layer_norm(ps, prefix + ".ln1", cfg.hidden);
  init_linear(ps, prefix + ".attn.q", cfg.hidden, cfg.hidden, rng);
  init_linear(ps, prefix + ".attn.k", cfg.hidden, cfg.hidden, rng);
  init_linear(ps, prefix + ".attn.v", cfg.hidden, cfg.hidden, rng);
  init_linear(ps, prefix + ".attn.o", cfg.hidden, cfg.hidden, rng);
  init_layer_norm(ps, prefix + ".ln2", cfg.hidden);
  init_linear(ps, prefix + ".mlp.1", cfg.hidden, cfg.ffn, rng);
  init_linear(ps, prefix + ".mlp.2", cfg.ffn, cfg.hidden, rng);
}

void init_stack(ParamStore& ps, const std::string& prefix, int layers,
                const BlockConfig& cfg, Rng& rng) {
  for (int l = 0; l < layers; ++l) {
    init_block(ps, prefix + ".blk" + std::to_string(l), cfg, rng);
  }
  init_layer_norm(ps, prefix + ".lnf", cfg.hidden);
}

Var attention(const ParamCtx& P, const std::string& prefix, const Var& q_in,
              const Var& kv_in, int heads, const Var* attn_bias) {
  const int hidden = q_in.value().cols();
  if (hidden % heads != 0) {
    throw DimensionMismatchError("hidden not divisible by heads");
  }
  const int dh = hidden / heads;
  const double inv_scale = 1.0 / std::sqrt((double)dh);

  Var q = linear(P, prefix + ".q", q_in);
  Var k = linear(P, prefix + ".k", kv_in);
  Var v = linear(P, prefix + ".v", kv_in);

  std::vector<Var> head_outs;
  head_outs.reserve((size_t)heads);
  for (int h = 0; h < heads; ++h) {
    Var qh = slice_cols(q, h * dh, (h + 1) * dh);
    Var kh = slice_cols(k, h * dh, (h + 1) * dh);
    Var vh = slice_cols(v, h * dh, (h + 1) * dh);
    Var logits = scale(matmul(qh, transpose(kh)), inv_scale);
    if (attn_bias != nullptr) logits = add(logits, *attn_bias);
    Var w = softmax_rows(logits);
    head_outs.push_back(matmul(w, vh));
  }
  return linear(P, prefix + ".o", concat_cols(head_outs));
}

Var block_forward(const ParamCtx& P, const std::string& prefix,
                  const BlockConfig& cfg, const Var& x, const Var* attn_bias) {
  Var n1 = layer_norm(P, prefix + ".ln1", x);
  Var a = attention(P, prefix + ".attn", n1, n1, cfg.heads, attn_bias);
  Var x1 = add(x, a);
  Var n2 = layer_norm(P, prefix + ".ln2", x1);
  Var m = linear(P, prefix + ".mlp.2", gelu(linear(P, prefix + ".mlp.1", n2)));
  return add(x1, m);
}

Var cross_block_forward(const ParamCtx& P, const std::string& prefix,
                        const BlockConfig& cfg, const Var& q, const Var& kv) {
  Var n1 = layer_norm(P, prefix + ".ln1", q);
  Var a = attention(P, prefix + ".attn", n1, kv, cfg.heads, nullptr);
  Var q1 = add(q, a);
  Var n2 = layer_norm(P, prefix + ".ln2", q1);
  Var m = linear(P, prefix + ".mlp.2", gelu(linear(P, prefix + ".mlp.1", n2)));
  return add(q1, m);
}

Var stack_forward(const ParamCtx& P, const std::string& prefix, int layers,
                  const BlockConfig& cfg, const Var& x, const Var* attn_bias) {
  Var h = x;
  for (int l = 0; l < layers; ++l) {
    h = block_forward(P, prefix + ".blk" + std::to_string(l), cfg, h,
                      attn_bias);
  }
  return layer_norm(P, prefix + ".lnf", h);
}

Tensor causal_attention_bias(int t) {
  Tensor b = Tensor::zeros({t, t});
  for (int i = 0; i < t; ++i) {
    for (int j = i + 1; j < t; ++j) b.at(i, j) = -1e9;
  }
  return b;
}

Tensor sinusoidal_positions(int t, int dim) {
  Tensor e = Tensor::zeros({t, dim});
  for (int p = 0; p < t; ++p) {
    for (int i = 0; i < dim; i += 2) {
      double freq = std::pow(10000.0, -(double)i / (double)dim);
      e.at(p, i) = std::sin(p * freq);
      if (i + 1 < dim) e.at(p, i + 1) = std::cos(p * freq);
    }
  }
  return e;
}

Tensor sinusoidal_time(double t01, int dim) {
  Tensor e = Tensor::zeros({1, dim});
  // Scale to a nominal 1000-step range so nearby times stay distinguishable.
  double p = t01 * 1000.0;
  for (int i = 0; i < dim; i += 2) {
    double freq = std::pow(10000.0, -(double)i / (double)dim);
    e.at(0, i) = std::sin(p * freq);
    if (i + 1 < dim) e.at(0, i + 1) = std::cos(p * freq);
  }
  return e;
}

}  // namespace nn
}  // namespace flespeech
