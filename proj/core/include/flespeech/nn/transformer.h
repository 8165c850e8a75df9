// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#ifndef FLESPEECH_NN_TRANSFORMER_H_
#define FLESPEECH_NN_TRANSFORMER_H_

#include <string>

#include "flespeech/common/rng.h"
#include "flespeech/nn/ops.h"
#include "flespeech/nn/params.h"

namespace flespeech {
namespace nn {

// Pre-LN transformer blocks shared by the token LM, the flow transformer,
// and the prompt encoders. hidden must be divisible by heads.
struct BlockConfig {
  int hidden = 64;
  int heads = 2;
  int ffn = 256;
};

// Creates parameters for one block under `prefix.` (ln1/attn/ln2/mlp).
void init_block(ParamStore& ps, const std::string& prefix,
                const BlockConfig& cfg, Rng& rng);

// Creates `layers` blocks plus a final layer norm under `prefix.`.
void init_stack(ParamStore& ps, const std::string& prefix, int layers,
                const BlockConfig& cfg, Rng& rng);

// Multi-head attention; q_in [Tq, hidden], kv_in [Tkv, hidden]. attn_bias,
// when given, is an additive [Tq, Tkv] constant applied to the logits.
Var attention(const ParamCtx& P, const std::string& prefix, const Var& q_in,
              const Var& kv_in, int heads, const Var* attn_bias);

// Self-attention block: x + attn(ln1(x)) followed by x + mlp(ln2(x)).
Var block_forward(const ParamCtx& P, const std::string& prefix,
                  const BlockConfig& cfg, const Var& x, const Var* attn_bias);

// Cross-attention block: queries attend over a separate sequence.
Var cross_block_forward(const ParamCtx& P, const std::string& prefix,
                        const BlockConfig& cfg, const Var& q, const Var& kv);

// Full stack incl. final layer norm.
Var stack_forward(const ParamCtx& P, const std::string& prefix, int layers,
                  const BlockConfig& cfg, const Var& x, const Var* attn_bias);

// Additive causal mask: 0 at or below the diagonal, -1e9 above.
Tensor causal_attention_bias(int t);

// Fixed sinusoidal position table [t, dim].
Tensor sinusoidal_positions(int t, int dim);

// Embedding of a scalar time in [0, 1] -> [1, dim].
Tensor sinusoidal_time(double t01, int dim);

}  // namespace nn
}  // namespace flespeech

#endif  // FLESPEECH_NN_TRANSFORMER_H_
