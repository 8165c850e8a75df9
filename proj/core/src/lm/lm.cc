// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#include "flespeech/lm/lm.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "flespeech/common/error.h"
#include "flespeech/common/rng.h"
#include "flespeech/nn/ops.h"
#include "flespeech/nn/transformer.h"

namespace flespeech {
namespace lm {

namespace {

using nn::Var;

nn::BlockConfig block_config(const LMConfig& cfg) {
  return nn::BlockConfig{cfg.hidden, cfg.heads, cfg.ffn};
}

void check_tokens(const std::vector<int>& tokens, int k) {
  for (int t : tokens) {
    if (t < 0 || t >= k) {
      throw DimensionMismatchError("token id outside semantic vocabulary");
    }
  }
}

void check_phonemes(const std::vector<int>& ids, const LMConfig& cfg) {
  if (ids.empty()) throw EmptyTextError("empty phoneme sequence");
  for (int id : ids) {
    if (id < 0 || id >= cfg.phoneme_count) {
      throw DimensionMismatchError("phoneme id outside inventory");
    }
  }
}

void check_condition(const nn::Tensor& v, Stage stage, Stage expected,
                     const LMConfig& cfg) {
  if (stage != expected) {
    throw StageMismatchError("condition produced for " + stage_name(stage));
  }
  if (v.size() != cfg.d_cond) {
    throw DimensionMismatchError("condition dimension mismatch");
  }
}

}  // namespace

LMConfig lm_reference_config() {
  LMConfig cfg;
  cfg.layers = 16;
  cfg.heads = 16;
  cfg.hidden = 1024;
  cfg.ffn = 4096;
  return cfg;
}

LMModel LMModel::init(const LMConfig& cfg, uint64_t seed) {
  if (cfg.phoneme_count <= 0) {
    throw DimensionMismatchError("LM needs a phoneme inventory size");
  }
  LMModel m;
  m.cfg = cfg;
  Rng rng(seed);
  const double std = 0.02;
  m.params.create_gaussian("lm.phon_emb", {cfg.phoneme_count, cfg.hidden}, rng,
                           std);
  m.params.create_gaussian("lm.tok_emb", {cfg.vocab(), cfg.hidden}, rng, std);
  m.params.create_gaussian("lm.cond.w", {cfg.d_cond, cfg.hidden}, rng, std);
  m.params.create_full("lm.cond.b", {cfg.hidden}, 0.0);
  nn::init_stack(m.params, "lm.stack", cfg.layers, block_config(cfg), rng);
  m.params.create_gaussian("lm.head.w", {cfg.hidden, cfg.vocab()}, rng, std);
  m.params.create_full("lm.head.b", {cfg.vocab()}, 0.0);
  return m;
}

nn::Var lm_token_logits(const std::vector<int>& phoneme_ids,
                        const nn::Var& condition,
                        const std::vector<int>& input_tokens,
                        const nn::ParamCtx& P, const LMConfig& cfg) {
  const int n_phon = (int)phoneme_ids.size();
  const int n_tok = (int)input_tokens.size();
  const int total = 1 + n_phon + n_tok;

  Var cond_row =
      nn::add_rowvec(nn::matmul(condition, P("lm.cond.w")), P("lm.cond.b"));
  Var phon = nn::gather_rows(P("lm.phon_emb"), phoneme_ids);
  Var toks = nn::gather_rows(P("lm.tok_emb"), input_tokens);
  Var x = nn::concat_rows({cond_row, phon, toks});
  x = nn::add(x, Var::constant(nn::sinusoidal_positions(total, cfg.hidden)));

  Var bias = Var::constant(nn::causal_attention_bias(total));
  Var h = nn::stack_forward(P, "lm.stack", cfg.layers, block_config(cfg), x,
                            &bias);
  Var token_h = nn::slice_rows(h, 1 + n_phon, total);
  return nn::add_rowvec(nn::matmul(token_h, P("lm.head.w")), P("lm.head.b"));
}

nn::Var lm_loss_var(const PhonemeSequence& phonemes, const nn::Var& condition,
                    const tokenizer::SemanticTokenSequence& targets,
                    const nn::ParamCtx& P, const LMConfig& cfg) {
  check_phonemes(phonemes.ids, cfg);
  if (targets.tokens.empty()) {
    throw EmptySequenceError("no target tokens");
  }
  check_tokens(targets.tokens, cfg.k_tokens);

  // Input: BOS then all targets; predicted: all targets then EOS.
  std::vector<int> input_tokens;
  input_tokens.reserve(targets.tokens.size() + 1);
  input_tokens.push_back(cfg.eos_id());
  input_tokens.insert(input_tokens.end(), targets.tokens.begin(),
                      targets.tokens.end());
  std::vector<int> predicted = targets.tokens;
  predicted.push_back(cfg.eos_id());

  Var logits = lm_token_logits(phonemes.ids, condition, input_tokens, P, cfg);
  return nn::cross_entropy_mean(logits, predicted);
}

LMLossReport lm_loss(const PhonemeSequence& phonemes,
                     const ConditionEmbedding& condition,
                     const tokenizer::SemanticTokenSequence& targets,
                     const LMModel& model) {
  check_condition(condition.vector, condition.source_stage, Stage::lm,
                  model.cfg);
  nn::ParamCtx P{const_cast<nn::ParamStore*>(&model.params), true};
  Var cond = Var::constant(condition.vector);
  Var loss = lm_loss_var(phonemes, cond, targets, P, model.cfg);
  return LMLossReport{loss.value().at(0)};
}

GenerationResult lm_generate(const PhonemeSequence& phonemes,
                             const ConditionEmbedding& condition,
                             const LMModel& model,
                             const SamplingConfig& sampling) {
  const LMConfig& cfg = model.cfg;
  check_condition(condition.vector, condition.source_stage, Stage::lm, cfg);
  check_phonemes(phonemes.ids, cfg);
  if (sampling.max_tokens <= 0) {
    throw EmptySequenceError("max_tokens must be positive");
  }

  nn::ParamCtx P{const_cast<nn::ParamStore*>(&model.params), true};
  Var cond = Var::constant(condition.vector);
  Rng rng(sampling.seed);

  GenerationResult result;
  result.tokens.frame_rate_hz = cfg.token_rate_hz;
  std::vector<int> input_tokens{cfg.eos_id()};  // BOS
  for (int step = 0; step < sampling.max_tokens; ++step) {
    Var logits =
        lm_token_logits(phonemes.ids, cond, input_tokens, P, cfg);
    const int last = (int)input_tokens.size() - 1;
    std::vector<double> row((size_t)cfg.vocab());
    for (int v = 0; v < cfg.vocab(); ++v) row[(size_t)v] = logits.value().at(last, v);
    if (step < sampling.min_tokens) {
      row[(size_t)cfg.eos_id()] = -1e30;  // too short to stop
    }

    int picked;
    if (sampling.temperature <= 0.0) {
      picked = (int)(std::max_element(row.begin(), row.end()) - row.begin());
    } else {
      const int k = std::max(1, std::min(sampling.top_k, cfg.vocab()));
      std::vector<int> order((size_t)cfg.vocab());
      for (int v = 0; v < cfg.vocab(); ++v) order[(size_t)v] = v;
      std::partial_sort(order.begin(), order.begin() + k, order.end(),
                        [&](int a, int b) {
                          if (row[(size_t)a] != row[(size_t)b]) {
                            return row[(size_t)a] > row[(size_t)b];
                          }
                          return a < b;
                        });
      double max_logit = row[(size_t)order[0]];
      std::vector<double> probs((size_t)k);
      double z = 0.0;
      for (int i = 0; i < k; ++i) {
        probs[(size_t)i] = std::exp(
            (row[(size_t)order[(size_t)i]] - max_logit) / sampling.temperature);
        z += probs[(size_t)i];
      }
      double u = rng.uniform() * z;
      double acc = 0.0;
      picked = order[(size_t)k - 1];
      for (int i = 0; i < k; ++i) {
        acc += probs[(size_t)i];
        if (acc >= u) {
          picked = order[(size_t)i];
          break;
        }
      }
    }

    if (picked == cfg.eos_id()) return result;
    result.tokens.tokens.push_back(picked);
    input_tokens.push_back(picked);
  }
  result.truncated = true;
  return result;
}

void save_lm(const std::string& dir, const LMModel& model) {
  std::filesystem::create_directories(dir);
  nlohmann::json j;
  j["type"] = "lm";
  j["layers"] = model.cfg.layers;
  j["heads"] = model.cfg.heads;
  j["hidden"] = model.cfg.hidden;
  j["ffn"] = model.cfg.ffn;
  j["k_tokens"] = model.cfg.k_tokens;
  j["phoneme_count"] = model.cfg.phoneme_count;
  j["d_cond"] = model.cfg.d_cond;
  j["token_rate_hz"] = model.cfg.token_rate_hz;
  const std::string tmp = dir + "/config.json.tmp";
  {
    std::ofstream f(tmp);
    f << j.dump(2) << "\n";
  }
  std::filesystem::rename(tmp, dir + "/config.json");
  model.params.save(dir + "/params.fls");
}

LMModel load_lm(const std::string& dir) {
  std::ifstream f(dir + "/config.json");
  if (!f) throw IoError("missing lm config in " + dir);
  nlohmann::json j = nlohmann::json::parse(f);
  LMConfig cfg;
  cfg.layers = j.at("layers").get<int>();
  cfg.heads = j.at("heads").get<int>();
  cfg.hidden = j.at("hidden").get<int>();
  cfg.ffn = j.at("ffn").get<int>();
  cfg.k_tokens = j.at("k_tokens").get<int>();
  cfg.phoneme_count = j.at("phoneme_count").get<int>();
  cfg.d_cond = j.at("d_cond").get<int>();
  cfg.token_rate_hz = j.at("token_rate_hz").get<double>();
  LMModel m;
  m.cfg = cfg;
  m.params.load(dir + "/params.fls");
  return m;
}

}  // namespace lm
}  // namespace flespeech
