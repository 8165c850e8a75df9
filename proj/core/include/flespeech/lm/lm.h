// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#ifndef FLESPEECH_LM_LM_H_
#define FLESPEECH_LM_LM_H_

#include <cstdint>
#include <string>
#include <vector>

#include "flespeech/lm/lexicon.h"
#include "flespeech/nn/optim.h"
#include "flespeech/nn/params.h"
#include "flespeech/stage.h"
#include "flespeech/tokenizer/tokenizer.h"

namespace flespeech {
namespace lm {

// Decoder-only transformer over [condition, phonemes, tokens]. The condition
// embedding is projected to model width and prepended as a single prefix
// position. Token id k_tokens doubles as BOS on the input side and EOS on
// the target side, so the output vocabulary is k_tokens + 1.
struct LMConfig {
  int layers = 4;
  int heads = 4;
  int hidden = 256;
  int ffn = 1024;
  int k_tokens = 300;
  int phoneme_count = 0;
  int d_cond = 64;
  double token_rate_hz = 50.0;

  int eos_id() const { return k_tokens; }
  int vocab() const { return k_tokens + 1; }
};

// Sizes used by the full-scale system; kept as a preset, not the default.
LMConfig lm_reference_config();

struct LMModel {
  LMConfig cfg;
  nn::ParamStore params;

  static LMModel init(const LMConfig& cfg, uint64_t seed);
};

struct LMLossReport {
  double loss = 0.0;
};

// Logits for every token-region position. input_tokens[0] must be the BOS
// id; position i predicts the token that follows input_tokens[i]. Exposed so
// tests can probe causality directly.
nn::Var lm_token_logits(const std::vector<int>& phoneme_ids,
                        const nn::Var& condition,
                        const std::vector<int>& input_tokens,
                        const nn::ParamCtx& P, const LMConfig& cfg);

// Mean cross-entropy over target positions (prompt positions carry no loss
// terms by construction). Differentiable in the condition.
nn::Var lm_loss_var(const PhonemeSequence& phonemes, const nn::Var& condition,
                    const tokenizer::SemanticTokenSequence& targets,
                    const nn::ParamCtx& P, const LMConfig& cfg);

LMLossReport lm_loss(const PhonemeSequence& phonemes,
                     const ConditionEmbedding& condition,
                     const tokenizer::SemanticTokenSequence& targets,
                     const LMModel& model);

struct SamplingConfig {
  int max_tokens = 512;
  // EOS is suppressed before this many tokens so a sequence is never empty.
  int min_tokens = 1;
  double temperature = 0.9;
  int top_k = 20;
  uint64_t seed = 0;
};

struct GenerationResult {
  tokenizer::SemanticTokenSequence tokens;
  // Set when max_tokens was reached before EOS; not an error.
  bool truncated = false;
};

GenerationResult lm_generate(const PhonemeSequence& phonemes,
                             const ConditionEmbedding& condition,
                             const LMModel& model,
                             const SamplingConfig& sampling);

void save_lm(const std::string& dir, const LMModel& model);
LMModel load_lm(const std::string& dir);

}  // namespace lm
}  // namespace flespeech

#endif  // FLESPEECH_LM_LM_H_
