// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0
//
// Release gate: twelve oracle-backed checks over the full stack, each
// printed as one PASS/FAIL line. The process exit code is the number of
// failed checks, so CI can gate on it directly.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "flespeech/audio/wav.h"
#include "flespeech/clients/clients.h"
#include "flespeech/codec/codec.h"
#include "flespeech/common/error.h"
#include "flespeech/common/rng.h"
#include "flespeech/data/attributes.h"
#include "flespeech/data/captions.h"
#include "flespeech/data/gate.h"
#include "flespeech/data/labeling.h"
#include "flespeech/data/manifest.h"
#include "flespeech/dsp/filterbank.h"
#include "flespeech/fm/fm.h"
#include "flespeech/lm/lexicon.h"
#include "flespeech/lm/lm.h"
#include "flespeech/mpe/mpe.h"
#include "flespeech/nn/optim.h"
#include "flespeech/pipeline/pipeline.h"
#include "flespeech/tokenizer/tokenizer.h"
#include "flespeech/train/checkpoint.h"
#include "flespeech/train/config.h"
#include "flespeech/train/schedule.h"
#include "flespeech/train/stages.h"

#include "json.hpp"
#include "test_util.h"
#include "toy_system.h"

#ifndef FLESPEECH_CLI_PATH
#error "FLESPEECH_CLI_PATH must point at the flespeech tool binary"
#endif

using namespace flespeech;
using nn::Tensor;
using nn::Var;

namespace {

// ---------------------------------------------------------------------------
// Harness

struct Check {
  std::vector<std::string> problems;

  void require(bool ok, const std::string& what) {
    if (!ok) problems.push_back(what);
  }
};

std::string format_seconds(double s) {
  std::ostringstream out;
  out.precision(1);
  out << std::fixed << s << " s";
  return out.str();
}

// ---------------------------------------------------------------------------
// Shared trained toy system for the stage-3, CLI, and control checks.
// Budgets are sized so the whole gate stays within a few minutes.

testing::ToySystemOptions gate_system_options() {
  testing::ToySystemOptions opt;
  opt.seed = 2026;
  opt.corpus.speakers = 3;
  opt.corpus.clips_per_speaker = 6;
  opt.codebook_k = 24;
  opt.codec_steps = 30;
  opt.stage1_steps = 300;
  opt.stage2_steps = 60;
  opt.stage3_steps = 400;
  opt.d_cond = 16;
  opt.lr_peak = 3e-3;
  opt.warmup_steps = 20;
  opt.total_schedule_steps = 8000;
  return opt;
}

struct SharedSystem {
  testing::TempDir tmp{"flespeech_gate"};
  testing::ToySystem sys;
  SharedSystem() : sys(testing::train_toy_system(tmp.str(), gate_system_options())) {}
};

const SharedSystem& shared_system() {
  static SharedSystem s;
  return s;
}

double cosine(const Tensor& a, const Tensor& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (int64_t i = 0; i < a.size(); ++i) {
    dot += a.data()[i] * b.data()[i];
    na += a.data()[i] * a.data()[i];
    nb += b.data()[i] * b.data()[i];
  }
  return dot / std::sqrt(std::max(na * nb, 1e-300));
}

std::string file_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream out;
  out << f.rdbuf();
  return out.str();
}

// ---------------------------------------------------------------------------
// 1. Tokenizer equals a brute-force nearest-centroid scan.

void criterion_tokenizer(Check& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const int k = 300, dim = 80, frames = 1000;
  Rng rng(101);

  tokenizer::KMeansCodebook codebook;
  codebook.centroids = Tensor::zeros({k, dim});
  for (double& v : codebook.centroids.vec()) {
    v = (double)(float)rng.uniform(-1.0, 1.0);  // stored precision is f32
  }

  tokenizer::FeatureFrameSequence feats;
  feats.frames = Tensor::zeros({frames, dim});
  feats.frame_rate_hz = 50.0;
  for (double& v : feats.frames.vec()) v = rng.uniform(-1.0, 1.0);

  const auto tokens = tokenizer::tokenize(feats, codebook);
  c.require((int)tokens.tokens.size() == frames, "token count mismatch");

  int mismatches = 0;
  for (int f = 0; f < frames; ++f) {
    int best = 0;
    double best_d = 1e300;
    for (int j = 0; j < k; ++j) {
      double d = 0.0;
      for (int i = 0; i < dim; ++i) {
        const double diff =
            feats.frames.at(f, i) - codebook.centroids.at(j, i);
        d += diff * diff;
      }
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    if (tokens.tokens[(size_t)f] != best) ++mismatches;
  }
  c.require(mismatches == 0,
            std::to_string(mismatches) + "/1000 frames disagree with the scan");

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  c.require(elapsed < 10.0,
            "runtime " + format_seconds(elapsed) + " exceeds 10 s");
}

// ---------------------------------------------------------------------------
// 2. Interval bounds, category assignment, and the quality gate thresholds.

void criterion_labeling(Check& c) {
  Rng rng(202);
  std::vector<double> values(1000);
  for (double& v : values) v = rng.uniform(50.0, 400.0);

  const auto bounds = data::compute_interval_bounds(values);
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= (double)values.size();
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= (double)values.size();
  const double sigma = std::sqrt(var);
  c.require(bounds.low_cut == mean - sigma, "low cut is not mean - sigma");
  c.require(bounds.high_cut == mean + sigma, "high cut is not mean + sigma");

  int category_mismatches = 0;
  for (double v : values) {
    const data::Category want = v < bounds.low_cut    ? data::Category::low
                                : v > bounds.high_cut ? data::Category::high
                                                      : data::Category::normal;
    if (data::assign_category(v, bounds) != want) ++category_mismatches;
  }
  c.require(category_mismatches == 0,
            std::to_string(category_mismatches) + "/1000 categories disagree");

  // Full records through compute_corpus_bounds + assign_label.
  std::vector<data::AttributeRecord> records(200);
  for (auto& r : records) {
    r.pitch_mean_hz = rng.uniform(80.0, 350.0);
    r.rms_mean = rng.uniform(0.05, 0.5);
    r.speech_rate = rng.uniform(1.0, 8.0);
  }
  const auto corpus_bounds = data::compute_corpus_bounds(records);
  int label_mismatches = 0;
  for (const auto& r : records) {
    const auto label = data::assign_label(r, corpus_bounds);
    if (label.pitch != data::assign_category(
                           r.pitch_mean_hz,
                           corpus_bounds.by_attribute.at("pitch")) ||
        label.rms != data::assign_category(
                         r.rms_mean, corpus_bounds.by_attribute.at("rms")) ||
        label.speech_rate !=
            data::assign_category(
                r.speech_rate,
                corpus_bounds.by_attribute.at("speech_rate"))) {
      ++label_mismatches;
    }
  }
  c.require(label_mismatches == 0,
            std::to_string(label_mismatches) + "/200 labels disagree");

  // Gate thresholds are strict inequalities; word minimum is inclusive.
  data::ManifestEntry entry;
  entry.transcript = "three word utterance";
  entry.snr_score = 0.7;
  entry.dnsmos = 3.0;
  c.require(data::quality_gate(entry).accepted, "clean fixture rejected");

  auto with = [&](double snr, double mos, const std::string& text) {
    data::ManifestEntry e = entry;
    e.snr_score = snr;
    e.dnsmos = mos;
    e.transcript = text;
    return data::quality_gate(e).accepted;
  };
  c.require(!with(0.7, 2.6, entry.transcript), "dnsmos == 2.6 must fail");
  c.require(with(0.7, 2.6 + 1e-9, entry.transcript),
            "dnsmos just above 2.6 must pass");
  c.require(!with(0.6, 3.0, entry.transcript), "snr == 0.6 must fail");
  c.require(with(0.6 + 1e-9, 3.0, entry.transcript),
            "snr just above 0.6 must pass");
  c.require(!with(0.7, 3.0, "two words"), "2-word transcript must fail");
  c.require(with(0.7, 3.0, "one two three"), "3-word transcript must pass");
}

// ---------------------------------------------------------------------------
// 3. Every rendered style caption parses back to its source label.

void criterion_captions(Check& c) {
  const auto table = data::SynonymTable::load(testing::assets_dir() +
                                              "/style_synonyms.json");
  const data::Category cats[3] = {data::Category::low, data::Category::normal,
                                  data::Category::high};
  int total = 0, ok = 0;
  for (data::Category p : cats) {
    for (data::Category r : cats) {
      for (data::Category s : cats) {
        for (int extras = 0; extras < 2; ++extras) {
          data::StyleLabel label;
          label.pitch = p;
          label.rms = r;
          label.speech_rate = s;
          if (extras == 1) {
            label.gender = "female";
            label.emotion = "happy";
          }
          for (std::uint64_t seed = 0; seed < 10; ++seed) {
            ++total;
            const std::string caption =
                data::render_style_caption(label, table, seed);
            if (data::parse_style_caption(caption, table) == label) ++ok;
          }
        }
      }
    }
  }
  c.require(ok == total, std::to_string(total - ok) + "/" +
                             std::to_string(total) +
                             " captions failed to round-trip");
}

// ---------------------------------------------------------------------------
// 4. Pitch recovery on pure tones; silence never moves pitch statistics.

void criterion_pitch(Check& c) {
  for (double f0 : {220.0, 110.0}) {
    const AudioClip tone = testing::make_tone(f0, 1.0);
    const auto rec = data::extract_attributes(tone, "a a a");
    const double err = std::abs(rec.pitch_mean_hz - f0) / f0;
    c.require(err < 0.02, std::to_string(f0) + " Hz tone recovered as " +
                              std::to_string(rec.pitch_mean_hz) + " Hz");

    AudioClip padded = tone;
    padded.samples.insert(padded.samples.end(), (size_t)padded.sample_rate,
                          0.0);
    const auto rec2 = data::extract_attributes(padded, "a a a");
    c.require(std::abs(rec2.pitch_mean_hz - rec.pitch_mean_hz) < 1e-6,
              "silence moved pitch mean");
    c.require(std::abs(rec2.pitch_variance - rec.pitch_variance) < 1e-6,
              "silence moved pitch variance");
  }
}

// ---------------------------------------------------------------------------
// 5. Flow matching learns a known 2-D Gaussian and a conditioned mixture.

fm::FMConfig toy_fm_config() {
  fm::FMConfig cfg;
  cfg.layers = 2;
  cfg.heads = 2;
  cfg.hidden = 32;
  cfg.ffn = 64;
  cfg.d_lat = 2;
  cfg.d_cond = 4;
  cfg.k_tokens = 2;
  cfg.latent_rate_hz = 50.0;
  cfg.ode_steps = 32;
  cfg.cfg_scale = 1.0;
  cfg.cond_drop_prob = 0.0;
  return cfg;
}

tokenizer::SemanticTokenSequence one_token(int id) {
  tokenizer::SemanticTokenSequence t;
  t.tokens = {id};
  t.frame_rate_hz = 50.0;
  return t;
}

void train_toy_fm(fm::FMModel& model, int steps, double lr, std::uint64_t seed,
                  const std::function<std::pair<int, Tensor>(Rng&)>& draw) {
  Rng rng(seed);
  nn::AdamW opt;
  const Tensor zero_cond = Tensor::zeros({1, model.cfg.d_cond});
  for (int step = 0; step < steps; ++step) {
    const auto [token, target] = draw(rng);
    codec::AcousticLatentSequence x1;
    x1.latents = target;
    x1.frame_rate_hz = model.cfg.latent_rate_hz;
    model.params.zero_grads();
    const Var loss = fm::fm_loss_var(one_token(token), Var::constant(zero_cond),
                                     x1, nn::ParamCtx{&model.params, false},
                                     model.cfg, Rng::mix(seed, (uint64_t)step),
                                     false);
    nn::backward(loss);
    opt.step(model.params, lr);
  }
}

void criterion_flow_toy(Check& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const double mu[2] = {1.0, -0.5};
  const double sd[2] = {0.3, 0.2};

  // Single Gaussian, constant token.
  fm::FMModel model = fm::FMModel::init(toy_fm_config(), 501);
  train_toy_fm(model, 3000, 2e-3, 502, [&](Rng& rng) {
    Tensor x1 = Tensor::zeros({1, 2});
    x1.at(0, 0) = mu[0] + sd[0] * rng.gaussian();
    x1.at(0, 1) = mu[1] + sd[1] * rng.gaussian();
    return std::make_pair(0, x1);
  });

  ConditionEmbedding cond;
  cond.vector = Tensor::zeros({1, 4});
  cond.source_stage = Stage::acoustic;

  const int n = 1000;
  std::vector<std::array<double, 2>> samples((size_t)n);
  for (int i = 0; i < n; ++i) {
    const auto out = fm::ode_sample(one_token(0), cond, model, 5000 + (uint64_t)i);
    samples[(size_t)i] = {out.latents.at(0, 0), out.latents.at(0, 1)};
  }
  double m[2] = {0.0, 0.0};
  for (const auto& s : samples) {
    m[0] += s[0];
    m[1] += s[1];
  }
  m[0] /= n;
  m[1] /= n;
  double cov[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
  for (const auto& s : samples) {
    const double d0 = s[0] - m[0], d1 = s[1] - m[1];
    cov[0][0] += d0 * d0;
    cov[0][1] += d0 * d1;
    cov[1][0] += d1 * d0;
    cov[1][1] += d1 * d1;
  }
  for (auto& row : cov) {
    for (double& v : row) v /= n;
  }
  const double mean_err = std::hypot(m[0] - mu[0], m[1] - mu[1]);
  c.require(mean_err < 0.1,
            "sample mean error " + std::to_string(mean_err) + " >= 0.1");
  const double target[2][2] = {{sd[0] * sd[0], 0.0}, {0.0, sd[1] * sd[1]}};
  double num = 0.0, den = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      num += (cov[i][j] - target[i][j]) * (cov[i][j] - target[i][j]);
      den += target[i][j] * target[i][j];
    }
  }
  const double cov_err = std::sqrt(num / den);
  c.require(cov_err < 0.15,
            "relative covariance error " + std::to_string(cov_err) + " >= 0.15");

  // Two components selected by the token id.
  const double mA[2] = {-0.8, -0.8}, mB[2] = {0.8, 0.8};
  fm::FMModel cls = fm::FMModel::init(toy_fm_config(), 503);
  train_toy_fm(cls, 4000, 2e-3, 504, [&](Rng& rng) {
    const int token = rng.uniform() < 0.5 ? 0 : 1;
    const double* mean = token == 0 ? mA : mB;
    Tensor x1 = Tensor::zeros({1, 2});
    x1.at(0, 0) = mean[0] + 0.25 * rng.gaussian();
    x1.at(0, 1) = mean[1] + 0.25 * rng.gaussian();
    return std::make_pair(token, x1);
  });

  int correct = 0;
  for (int i = 0; i < 1000; ++i) {
    const int token = i % 2;
    const auto out =
        fm::ode_sample(one_token(token), cond, cls, 9000 + (uint64_t)i);
    const double x = out.latents.at(0, 0), y = out.latents.at(0, 1);
    const double dA = std::hypot(x - mA[0], y - mA[1]);
    const double dB = std::hypot(x - mB[0], y - mB[1]);
    const int decided = dA <= dB ? 0 : 1;
    if (decided == token) ++correct;
  }
  c.require(correct >= 950, "classified " + std::to_string(correct) +
                                "/1000, need >= 950");

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  c.require(elapsed < 300.0,
            "runtime " + format_seconds(elapsed) + " exceeds 5 min");
}

// ---------------------------------------------------------------------------
// 6. Analytic gradients match central finite differences.

std::vector<std::string> pick_names(const std::vector<std::string>& all,
                                    int count, Rng& rng) {
  std::vector<std::string> pool = all;
  std::vector<std::string> out;
  for (int i = 0; i < count && !pool.empty(); ++i) {
    const size_t at = (size_t)rng.uniform_int(pool.size());
    out.push_back(pool[at]);
    pool.erase(pool.begin() + (long)at);
  }
  return out;
}

void criterion_gradients(Check& c) {
  Rng rng(606);

  {  // flow-matching loss
    fm::FMConfig cfg;
    cfg.layers = 1;
    cfg.heads = 2;
    cfg.hidden = 16;
    cfg.ffn = 32;
    cfg.d_lat = 4;
    cfg.d_cond = 6;
    cfg.k_tokens = 10;
    fm::FMModel model = fm::FMModel::init(cfg, 607);
    tokenizer::SemanticTokenSequence tokens;
    tokens.tokens = {1, 4, 7};
    tokens.frame_rate_hz = 50.0;
    codec::AcousticLatentSequence x1;
    x1.latents = Tensor::zeros({3, 4});
    x1.frame_rate_hz = 50.0;
    for (double& v : x1.latents.vec()) v = rng.uniform(-1.0, 1.0);
    auto forward = [&]() -> Var {
      return fm::fm_loss_var(tokens, Var::constant(Tensor::zeros({1, 6})), x1,
                             nn::ParamCtx{&model.params, false}, cfg, 9, false);
    };
    const auto report = testing::check_gradients(
        model.params, pick_names(model.params.names(), 5, rng), forward, 1,
        rng);
    c.require(report.max_rel_err < 1e-3,
              "flow loss gradient error " + std::to_string(report.max_rel_err) +
                  " at " + report.worst_param);
  }

  {  // codec reconstruction + KL loss (the loss a codec train step descends)
    codec::CodecConfig cfg;
    cfg.d_lat = 6;
    cfg.hidden = 24;
    cfg.downsample = 160;
    codec::CodecModel model = codec::CodecModel::init(cfg, 608);
    const std::vector<AudioClip> batch = {testing::make_tone(200.0, 0.05, 0.4)};
    const auto mats = dsp::make_filterbank(dsp::FeatureConfig{});
    auto forward = [&] {
      return codec::codec_loss_var(batch, nn::ParamCtx{&model.params, false},
                                   cfg, mats, 3, nullptr);
    };
    const auto report = testing::check_gradients(
        model.params, pick_names(model.params.names(), 5, rng), forward, 1,
        rng);
    c.require(report.max_rel_err < 1e-3,
              "codec loss gradient error " +
                  std::to_string(report.max_rel_err) + " at " +
                  report.worst_param);
  }

  {  // diffusion prior loss, trainable subset only
    mpe::MPEConfig cfg;
    cfg.d_cond = 8;
    cfg.ref_blocks = 1;
    cfg.ref_heads = 2;
    cfg.ref_ffn = 16;
    cfg.prompt_seconds = 0.5;
    cfg.num_queries = 2;
    cfg.q_hidden = 12;
    cfg.q_layers = 1;
    cfg.q_heads = 2;
    cfg.q_ffn = 24;
    cfg.d_modality = 8;
    cfg.prior_blocks = 1;
    cfg.prior_heads = 2;
    cfg.prior_ffn = 24;
    cfg.diffusion_steps = 12;
    mpe::MPEModel model = mpe::MPEModel::init(cfg, Stage::lm, 609);
    clients::OfflineTextEncoder text(8);
    clients::OfflineVisionEncoder vision(8);
    mpe::PromptClients clients{&text, &vision};
    mpe::PromptBundle bundle;
    bundle.set_text("a deep narrator");
    Tensor x0 = Tensor::zeros({1, 8});
    for (double& v : x0.vec()) v = rng.uniform(-1.0, 1.0);
    auto forward = [&] {
      return mpe::prior_forward_var(bundle, clients, x0, model,
                                    nn::ParamCtx{&model.params, false}, 4)
          .loss;
    };
    const auto report = testing::check_gradients(
        model.params, pick_names(mpe::prior_trainable_names(model), 5, rng),
        forward, 1, rng);
    c.require(report.max_rel_err < 1e-3,
              "prior loss gradient error " +
                  std::to_string(report.max_rel_err) + " at " +
                  report.worst_param);
  }
}

// ---------------------------------------------------------------------------
// 7. LM memorizes one pair; logits stay causal at every position.

void criterion_lm(Check& c) {
  lm::LMConfig cfg;
  cfg.layers = 1;
  cfg.heads = 2;
  cfg.hidden = 32;
  cfg.ffn = 64;
  cfg.k_tokens = 12;
  cfg.phoneme_count = 8;
  cfg.d_cond = 8;

  lm::LMModel model = lm::LMModel::init(cfg, 701);
  lm::PhonemeSequence phonemes;
  phonemes.ids = {1, 4, 2, 0, 3};
  tokenizer::SemanticTokenSequence target;
  target.tokens = {3, 1, 4, 1, 5, 9, 2, 6};
  target.frame_rate_hz = cfg.token_rate_hz;
  const Tensor zero_cond = Tensor::zeros({1, cfg.d_cond});

  nn::AdamW opt;
  double loss = 1e9;
  int steps = 0;
  for (; steps < 500 && loss > 0.05; ++steps) {
    model.params.zero_grads();
    const Var l =
        lm::lm_loss_var(phonemes, Var::constant(zero_cond), target,
                        nn::ParamCtx{&model.params, false}, cfg);
    nn::backward(l);
    opt.step(model.params, 3e-3);
    loss = l.value().at(0);
  }
  c.require(loss < 0.1, "loss " + std::to_string(loss) + " after " +
                            std::to_string(steps) + " steps");

  ConditionEmbedding cond;
  cond.vector = zero_cond;
  cond.source_stage = Stage::lm;
  lm::SamplingConfig sampling;
  sampling.top_k = 1;
  sampling.max_tokens = 32;
  const auto out = lm::lm_generate(phonemes, cond, model, sampling);
  c.require(out.tokens.tokens == target.tokens,
            "greedy decode differs from the memorized target");
  c.require(!out.truncated, "greedy decode never emitted the stop token");

  // Causality: mutate position j, rows before j are bit-identical and row j
  // itself moves. Checked at every position of a length-32 stream.
  nn::ParamCtx P{&model.params, true};
  Rng rng(702);
  std::vector<int> input(32);
  input[0] = cfg.eos_id();  // BOS
  for (size_t i = 1; i < input.size(); ++i) {
    input[i] = (int)rng.uniform_int((uint64_t)cfg.k_tokens);
  }
  const Tensor base =
      lm::lm_token_logits(phonemes.ids, Var::constant(zero_cond), input, P, cfg)
          .value();
  for (int j = 1; j < 32; ++j) {
    std::vector<int> mutated = input;
    mutated[(size_t)j] = (mutated[(size_t)j] + 1) % cfg.k_tokens;
    const Tensor got = lm::lm_token_logits(phonemes.ids,
                                           Var::constant(zero_cond), mutated,
                                           P, cfg)
                           .value();
    bool prefix_ok = true;
    for (int i = 0; i < j && prefix_ok; ++i) {
      for (int v = 0; v < cfg.vocab(); ++v) {
        if (got.at(i, v) != base.at(i, v)) {
          prefix_ok = false;
          break;
        }
      }
    }
    double own = 0.0;
    for (int v = 0; v < cfg.vocab(); ++v) {
      own += std::abs(got.at(j, v) - base.at(j, v));
    }
    if (!prefix_ok) {
      c.require(false, "future token at " + std::to_string(j) +
                           " leaked into an earlier row");
      break;
    }
    if (own == 0.0) {
      c.require(false, "token at " + std::to_string(j) +
                           " had no effect on its own row");
      break;
    }
  }
}

// ---------------------------------------------------------------------------
// 8. Prompt-encoder contracts: masking, stage isolation, prior overfit.

void criterion_mpe(Check& c) {
  mpe::MPEConfig cfg;
  cfg.d_cond = 8;
  cfg.ref_blocks = 1;
  cfg.ref_heads = 2;
  cfg.ref_ffn = 16;
  cfg.prompt_seconds = 0.5;
  cfg.num_queries = 2;
  cfg.q_hidden = 12;
  cfg.q_layers = 1;
  cfg.q_heads = 2;
  cfg.q_ffn = 24;
  cfg.d_modality = 8;
  cfg.prior_blocks = 1;
  cfg.prior_heads = 2;
  cfg.prior_ffn = 24;
  cfg.diffusion_steps = 16;

  clients::OfflineTextEncoder text(8);
  clients::OfflineVisionEncoder vision(8);
  mpe::PromptClients clients{&text, &vision};

  {  // masked-modality invariance, exact
    const auto model = mpe::MPEModel::init(cfg, Stage::lm, 801);
    nn::ParamCtx P{const_cast<nn::ParamStore*>(&model.params), true};
    mpe::PromptBundle a;
    a.set_text("steady and calm");
    mpe::PromptBundle b = a;
    b.audio = testing::make_tone(300.0, 0.4);
    b.use_audio = false;
    b.face_caption = "never read";
    b.use_face_caption = false;
    const Tensor ca = mpe::bundle_context_var(a, clients, model, P).value();
    const Tensor cb = mpe::bundle_context_var(b, clients, model, P).value();
    c.require(ca.vec() == cb.vec(),
              "masked modality contents leaked into the context");
  }

  {  // stage isolation, exact
    auto model_lm = mpe::MPEModel::init(cfg, Stage::lm, 802);
    auto model_ac = mpe::MPEModel::init(cfg, Stage::acoustic, 803);
    mpe::PromptBundle bundle;
    bundle.set_text("a bright narrator");
    const auto before =
        mpe::sample_condition(bundle, clients, &model_lm, Stage::lm, 11);
    for (const auto& name : model_ac.params.names()) {
      for (double& v : model_ac.params.value(name).vec()) v += 0.5;
    }
    const auto after =
        mpe::sample_condition(bundle, clients, &model_lm, Stage::lm, 11);
    c.require(before.vector.vec() == after.vector.vec(),
              "perturbing the other stage's model moved the condition");
  }

  {  // audio-only prior overfit on ten utterances
    auto model = mpe::MPEModel::init(cfg, Stage::lm, 804);
    std::vector<AudioClip> clips;
    std::vector<Tensor> targets;
    Rng rng(805);
    for (int i = 0; i < 10; ++i) {
      const double f0 = 140.0 + 22.0 * i;
      clips.push_back(testing::make_burst_clip(
          f0, 3, rng.uniform(0.05, 0.12), rng.uniform(0.03, 0.08),
          rng.uniform(0.3, 0.6)));
      targets.push_back(
          mpe::encode_reference_audio(clips.back(), model).vector);
    }
    nn::AdamW opt;
    for (int step = 0; step < 1000; ++step) {
      const size_t at = (size_t)(step % 10);
      mpe::PromptBundle bundle;
      bundle.set_audio(clips[at]);
      mpe::prior_train_step(bundle, clients, targets[at], model, opt, 3e-3,
                            (std::uint64_t)step);
    }
    double total = 0.0, worst = 1.0;
    for (size_t i = 0; i < 10; ++i) {
      mpe::PromptBundle bundle;
      bundle.set_audio(clips[i]);
      const auto cond =
          mpe::sample_condition(bundle, clients, &model, Stage::lm, 806);
      const double cs = cosine(cond.vector, targets[i]);
      total += cs;
      worst = std::min(worst, cs);
    }
    const double mean_cos = total / 10.0;
    c.require(mean_cos > 0.9, "mean cosine " + std::to_string(mean_cos) +
                                  " (worst " + std::to_string(worst) +
                                  ") <= 0.9 after 1000 steps");
  }
}

// ---------------------------------------------------------------------------
// 9. Learning-rate schedule landmarks.

void criterion_schedule(Check& c) {
  const train::LRSchedule s;  // warmup 5000, 1e-7 -> 3e-4
  const long long total = 10000;
  const double at0 = train::lr_at(0, s, total);
  const double at_peak = train::lr_at(5000, s, total);
  const double at_mid = train::lr_at(7500, s, total);
  c.require(testing::rel_err(at0, 1e-7) < 1e-12,
            "lr(0) = " + std::to_string(at0));
  c.require(testing::rel_err(at_peak, 3e-4) < 1e-12,
            "lr(5000) = " + std::to_string(at_peak));
  c.require(testing::rel_err(at_mid, 1.5e-4) < 1e-12,
            "decay midpoint = " + std::to_string(at_mid));
}

// ---------------------------------------------------------------------------
// 10. Stage 3 trains the prompt encoder without touching the generators.

void criterion_stage3_freeze(Check& c) {
  const auto& shared = shared_system();
  const auto opt = gate_system_options();

  auto models = train::load_models(
      train::latest_checkpoint_path(shared.sys.run_dir, 3));
  const std::uint64_t lm_before = models.lm.params.content_hash();
  const std::uint64_t fm_before = models.fm.params.content_hash();
  const std::uint64_t codec_before = models.codec.params.content_hash();

  train::HarnessConfig hc = train::harness_config(
      testing::toy_run_config(shared.tmp.str(), shared.sys, opt));
  hc.steps = opt.stage3_steps + 5;
  const auto report = train::run_stage(
      train::plan_for_stage(3, {shared.sys.manifest_path}), models, hc);

  c.require(models.lm.params.content_hash() == lm_before,
            "LM parameters changed during stage 3");
  c.require(models.fm.params.content_hash() == fm_before,
            "flow parameters changed during stage 3");
  c.require(models.codec.params.content_hash() == codec_before,
            "codec parameters changed during stage 3");
  c.require(report.frozen_hashes_before == report.frozen_hashes_after,
            "frozen hash report disagrees across the stage");
  c.require(report.first_terms.count("diffusion") == 1 &&
                report.first_terms.count("generation") == 1,
            "loss report is missing a diffusion or generation term");
  c.require(report.last_terms.count("diffusion") == 1 &&
                report.last_terms.count("generation") == 1,
            "final loss report is missing a diffusion or generation term");
}

// ---------------------------------------------------------------------------
// 11. The synth CLI is bit-deterministic across reruns for all four prompt
// pairings, and writes valid provenance sidecars.

void criterion_cli_determinism(Check& c) {
  const auto& shared = shared_system();
  testing::TempDir tmp("flespeech_cli");

  const std::string cli = FLESPEECH_CLI_PATH;
  const std::string models = shared.sys.model_dir;
  const std::string caption = "The speaker has a high pitch.";
  const std::string audio1 = shared.sys.corpus.stems[0] + ".wav";
  const std::string audio2 = shared.sys.corpus.stems[1] + ".wav";
  const std::string face = shared.sys.corpus.stems[0] + ".face.ppm";

  struct Combo {
    const char* name;
    std::string extra;
  };
  const std::vector<Combo> combos = {
      {"text+audio", "--s1-text \"" + caption + "\" --s2-audio " + audio2},
      {"text+face", "--s1-text \"" + caption + "\" --s2-image " + face},
      {"audio+audio", "--s1-audio " + audio1 + " --s2-audio " + audio2},
      {"audio+face", "--s1-audio " + audio1 + " --s2-image " + face},
  };

  int seed = 40;
  for (const auto& combo : combos) {
    ++seed;
    std::vector<std::string> outs;
    for (int run = 0; run < 2; ++run) {
      const std::string out = tmp.file(std::string(combo.name) + "_" +
                                       std::to_string(run) + ".wav");
      outs.push_back(out);
      const std::string cmd =
          "\"" + cli + "\" synth --text \"the cat sat on the warm stone wall\"" +
          " " + combo.extra + " --models " + models +
          " --seed " + std::to_string(seed) +
          " --max-tokens 120 --top-k 4 --out " + out + " >/dev/null 2>&1";
      const auto t0 = std::chrono::steady_clock::now();
      const int rc = std::system(cmd.c_str());
      const double elapsed =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();
      c.require(rc == 0, std::string(combo.name) + " run " +
                             std::to_string(run) + " exited " +
                             std::to_string(rc));
      c.require(elapsed < 120.0, std::string(combo.name) + " run took " +
                                     format_seconds(elapsed));
      if (rc != 0) return;
    }

    const std::string wav_a = file_bytes(outs[0]);
    const std::string wav_b = file_bytes(outs[1]);
    c.require(!wav_a.empty(), std::string(combo.name) + " produced no audio");
    c.require(wav_a == wav_b,
              std::string(combo.name) + " reruns differ at the byte level");

    for (const auto& out : outs) {
      std::ifstream side(out + ".json");
      if (!side.good()) {
        c.require(false, std::string(combo.name) + " missing sidecar");
        continue;
      }
      try {
        const auto j = nlohmann::json::parse(side);
        c.require(j.at("seed").get<int>() == seed,
                  std::string(combo.name) + " sidecar seed mismatch");
        c.require(j.at("seeds").contains("flow_noise") &&
                      j.at("prompt_hashes").contains("stage1") &&
                      j.at("prompt_hashes").contains("stage2") &&
                      j.at("model_hashes").contains("lm") &&
                      j.at("sampling").contains("top_k"),
                  std::string(combo.name) + " sidecar missing fields");
        c.require(j.at("generated_tokens").get<int>() > 0,
                  std::string(combo.name) + " sidecar reports no tokens");
      } catch (const std::exception& e) {
        c.require(false, std::string(combo.name) + " sidecar invalid: " +
                             e.what());
      }
    }
  }
}

// ---------------------------------------------------------------------------
// 12. Fast captions speed speech up relative to slow captions.

void criterion_rate_control(Check& c) {
  const auto& shared = shared_system();
  const auto table = data::SynonymTable::load(shared.sys.synonyms_path);
  pipeline::OfflineEncoders enc(shared.sys.models);
  const auto clients = enc.clients();

  auto caption_for = [&](data::Category rate, std::uint64_t seed) {
    data::StyleLabel label;
    label.pitch = data::Category::normal;
    label.rms = data::Category::normal;
    label.speech_rate = rate;
    return data::render_style_caption(label, table, seed);
  };

  const std::vector<std::string> texts = {
      "the quick brown fox jumps over the lazy dog",
      "she sells sea shells by the sea shore",
      "a calm voice reads the morning news",
      "good morning and welcome to the show",
      "birds sing in the tall green trees",
  };

  int pairs = 0, correct = 0;
  std::ostringstream detail;
  for (int p = 0; p < 10; ++p) {
    const std::string& text = texts[(size_t)(p % texts.size())];
    const std::uint64_t seed = 1200 + (std::uint64_t)p;

    auto speak = [&](data::Category rate) {
      pipeline::SynthesisRequest req;
      req.text = text;
      req.seed = seed;
      req.sampling.top_k = 1;  // condition decides, not sampling noise
      req.sampling.max_tokens = 400;
      req.stage1_prompts.set_text(caption_for(rate, seed));
      const auto result = pipeline::synthesize(req, shared.sys.models, clients);
      return data::extract_attributes(result.audio, text).speech_rate;
    };

    try {
      const double fast = speak(data::Category::high);
      const double slow = speak(data::Category::low);
      ++pairs;
      if (fast > slow) ++correct;
      detail << " " << fast << ">" << slow;
    } catch (const Error& e) {
      ++pairs;  // a failed extraction counts against the criterion
      detail << " error:" << e.what();
    }
  }
  c.require(pairs == 10, "expected 10 pairs");
  c.require(correct * 10 >= pairs * 8,
            std::to_string(correct) + "/" + std::to_string(pairs) +
                " pairs ordered correctly (need 80%):" + detail.str());
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<void(Check&)> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "tokenizer matches the brute-force nearest-centroid scan",
       criterion_tokenizer},
      {2, "interval labeling and the quality gate match their oracles",
       criterion_labeling},
      {3, "style captions round-trip through the synonym table",
       criterion_captions},
      {4, "pitch recovery on pure tones, silence-invariant statistics",
       criterion_pitch},
      {5, "flow matching learns a known Gaussian and a conditioned mixture",
       criterion_flow_toy},
      {6, "loss gradients match central finite differences",
       criterion_gradients},
      {7, "LM overfits one pair and stays causal at every position",
       criterion_lm},
      {8, "prompt encoder masking, stage isolation, and prior overfit",
       criterion_mpe},
      {9, "learning-rate schedule hits its landmarks", criterion_schedule},
      {10, "stage 3 leaves every generator parameter untouched",
       criterion_stage3_freeze},
      {11, "synth CLI is bit-deterministic over all four prompt pairings",
       criterion_cli_determinism},
      {12, "fast captions order re-extracted speech rates above slow ones",
       criterion_rate_control},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    Check check;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criterion.run(check);
    } catch (const std::exception& e) {
      check.problems.push_back(std::string("exception: ") + e.what());
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    const bool ok = check.problems.empty();
    if (!ok) ++failures;
    std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << criterion.id
              << ": " << criterion.name << " (" << format_seconds(elapsed)
              << ")\n";
    for (const auto& problem : check.problems) {
      std::cout << "       - " << problem << "\n";
    }
    std::cout.flush();
  }
  std::cout << (12 - failures) << "/12 criteria passed\n";
  return failures;
}
