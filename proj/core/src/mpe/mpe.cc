// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#include "flespeech/mpe/mpe.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "flespeech/common/error.h"
#include "flespeech/common/rng.h"

#include "json.hpp"

namespace flespeech {
namespace mpe {

using nn::Var;

namespace {

const char* kModalityOrder[kNumModalities] = {"text", "audio", "image",
                                              "video", "face_caption"};

nn::ParamCtx frozen_ctx(const MPEModel& model) {
  return nn::ParamCtx{const_cast<nn::ParamStore*>(&model.params), true};
}

nn::BlockConfig ref_block_config(const MPEConfig& cfg) {
  return nn::BlockConfig{cfg.d_cond, cfg.ref_heads, cfg.ref_ffn};
}

nn::BlockConfig query_block_config(const MPEConfig& cfg) {
  return nn::BlockConfig{cfg.q_hidden, cfg.q_heads, cfg.q_ffn};
}

nn::BlockConfig prior_block_config(const MPEConfig& cfg) {
  return nn::BlockConfig{cfg.q_hidden, cfg.prior_heads, cfg.prior_ffn};
}

Var linear(const nn::ParamCtx& P, const std::string& prefix, const Var& x) {
  return nn::add_rowvec(nn::matmul(x, P(prefix + ".w")), P(prefix + ".b"));
}

nn::Tensor concat_row_tensors(const std::vector<nn::Tensor>& parts) {
  int cols = parts.front().cols();
  int rows = 0;
  for (const auto& p : parts) {
    if (p.cols() != cols) {
      throw DimensionMismatchError("modality embedding widths differ");
    }
    rows += p.rows();
  }
  nn::Tensor out({rows, cols});
  int r = 0;
  for (const auto& p : parts) {
    for (int i = 0; i < p.rows(); ++i, ++r) {
      for (int j = 0; j < cols; ++j) out.at(r, j) = p.at(i, j);
    }
  }
  return out;
}

// Queries cross-attend over the modality rows; no positional encodings on
// either side, so the result is invariant to row permutations of kv.
Var run_query_stack(const nn::ParamCtx& P, const MPEConfig& cfg,
                    const Var& kv) {
  Var q = P("q.queries");
  const nn::BlockConfig bc = query_block_config(cfg);
  for (int l = 0; l < cfg.q_layers; ++l) {
    q = nn::cross_block_forward(P, "q.stack.blk" + std::to_string(l), bc, q,
                                kv);
  }
  return nn::layer_norm_rows(q, P("q.stack.lnf.g"), P("q.stack.lnf.b"));
}

// Denoiser: self-attention over [context rows; projected x_t; time row],
// reading the prediction off the x_t row.
Var predict_x0(const nn::ParamCtx& P, const MPEConfig& cfg, const Var& context,
               const Var& x_t, int step, int total_steps) {
  Var x_row = nn::add(linear(P, "prior.in_x", x_t), P("prior.xt_type"));
  nn::Tensor t_emb =
      nn::sinusoidal_time((double)step / (double)total_steps, cfg.q_hidden);
  Var t_row = linear(P, "prior.time", Var::constant(t_emb));
  Var tokens = nn::concat_rows({context, x_row, t_row});
  Var h = nn::stack_forward(P, "prior.stack", cfg.prior_blocks,
                            prior_block_config(cfg), tokens, nullptr);
  Var x_out = nn::slice_rows(h, cfg.num_queries, cfg.num_queries + 1);
  return linear(P, "prior.head", x_out);
}

int modality_feature_dim(const MPEConfig& cfg, const std::string& name) {
  // The audio modality is represented by the reference encoder's global
  // embedding instead of an external client.
  return name == "audio" ? cfg.d_cond : cfg.d_modality;
}

}  // namespace

MPEConfig mpe_reference_config() {
  MPEConfig cfg;
  cfg.d_cond = 512;
  cfg.ref_blocks = 6;
  cfg.ref_heads = 8;
  cfg.ref_ffn = 2048;
  cfg.num_queries = 16;
  cfg.q_hidden = 256;
  cfg.q_layers = 6;
  cfg.q_heads = 6;
  cfg.q_ffn = 256;
  cfg.prior_blocks = 4;
  cfg.prior_heads = 8;
  cfg.prior_ffn = 1024;
  return cfg;
}

DiffusionSchedule DiffusionSchedule::cosine(int steps, double s) {
  DiffusionSchedule sch;
  sch.beta.assign((size_t)steps + 1, 0.0);
  sch.alpha_bar.assign((size_t)steps + 1, 1.0);
  auto f = [steps, s](int i) {
    double u = ((double)i / (double)steps + s) / (1.0 + s);
    double c = std::cos(u * M_PI / 2.0);
    return c * c;
  };
  const double f0 = f(0);
  double prev_raw = 1.0;
  for (int i = 1; i <= steps; ++i) {
    double raw = f(i) / f0;
    double beta = 1.0 - raw / prev_raw;
    beta = std::min(std::max(beta, 1e-8), 0.999);
    sch.beta[(size_t)i] = beta;
    // Rebuild the cumulative product from the clipped betas so the forward
    // process and the sampler's posterior share one consistent schedule.
    sch.alpha_bar[(size_t)i] = sch.alpha_bar[(size_t)i - 1] * (1.0 - beta);
    prev_raw = raw;
  }
  return sch;
}

MPEModel MPEModel::init(const MPEConfig& cfg, Stage stage,
                        std::uint64_t seed) {
  MPEModel m;
  m.cfg = cfg;
  m.stage = stage;
  m.schedule = DiffusionSchedule::cosine(cfg.diffusion_steps);
  m.feat_cfg.sample_rate = cfg.sample_rate;
  m.feat_mats = dsp::make_filterbank(m.feat_cfg);

  Rng rng(seed);
  const double std = 0.02;
  auto& ps = m.params;

  ps.create_gaussian("ref.in.w", {m.feat_cfg.num_bands, cfg.d_cond}, rng, std);
  ps.create_full("ref.in.b", {cfg.d_cond}, 0.0);
  nn::init_stack(ps, "ref.stack", cfg.ref_blocks, ref_block_config(cfg), rng);

  ps.create_gaussian("q.queries", {cfg.num_queries, cfg.q_hidden}, rng, std);
  for (const char* name : kModalityOrder) {
    const std::string mn(name);
    ps.create_gaussian("q.proj." + mn + ".w",
                       {modality_feature_dim(cfg, mn), cfg.q_hidden}, rng, std);
    ps.create_full("q.proj." + mn + ".b", {cfg.q_hidden}, 0.0);
    ps.create_gaussian("q.type." + mn, {1, cfg.q_hidden}, rng, std);
    ps.create_gaussian("q.null." + mn, {1, cfg.q_hidden}, rng, std);
  }
  nn::init_stack(ps, "q.stack", cfg.q_layers, query_block_config(cfg), rng);

  ps.create_gaussian("prior.in_x.w", {cfg.d_cond, cfg.q_hidden}, rng, std);
  ps.create_full("prior.in_x.b", {cfg.q_hidden}, 0.0);
  ps.create_gaussian("prior.time.w", {cfg.q_hidden, cfg.q_hidden}, rng, std);
  ps.create_full("prior.time.b", {cfg.q_hidden}, 0.0);
  ps.create_gaussian("prior.xt_type", {1, cfg.q_hidden}, rng, std);
  nn::init_stack(ps, "prior.stack", cfg.prior_blocks, prior_block_config(cfg),
                 rng);
  ps.create_gaussian("prior.head.w", {cfg.q_hidden, cfg.d_cond}, rng, std);
  ps.create_full("prior.head.b", {cfg.d_cond}, 0.0);
  return m;
}

AudioClip fit_prompt_window(const AudioClip& audio, const MPEConfig& cfg) {
  if (audio.empty()) throw EmptyAudioError("reference prompt has no samples");
  if (audio.sample_rate != cfg.sample_rate) {
    throw SampleRateMismatchError("reference prompt sample rate");
  }
  const size_t target =
      (size_t)std::llround(cfg.prompt_seconds * (double)cfg.sample_rate);
  AudioClip out;
  out.sample_rate = audio.sample_rate;
  out.samples = audio.samples;
  out.samples.resize(target, 0.0);  // crop long inputs, zero-pad short ones
  return out;
}

nn::Var reference_audio_embedding_var(const AudioClip& fitted,
                                      const nn::ParamCtx& P,
                                      const MPEConfig& cfg,
                                      const dsp::FeatureConfig& feat_cfg,
                                      const dsp::FilterbankMatrices& mats) {
  Var samples = Var::constant(nn::Tensor::from_vector(
      {(int)fitted.samples.size()}, fitted.samples));
  Var frames = dsp::log_mel_frames_var(samples, feat_cfg, mats);
  Var h = linear(P, "ref.in", frames);
  h = nn::add(h, Var::constant(nn::sinusoidal_positions(frames.value().rows(),
                                                        cfg.d_cond)));
  h = nn::stack_forward(P, "ref.stack", cfg.ref_blocks, ref_block_config(cfg),
                        h, nullptr);
  return nn::mean_rows(h);
}

ReferenceAudioEmbedding encode_reference_audio(const AudioClip& audio,
                                               const MPEModel& model) {
  AudioClip fitted = fit_prompt_window(audio, model.cfg);
  Var emb = reference_audio_embedding_var(fitted, frozen_ctx(model), model.cfg,
                                          model.feat_cfg, model.feat_mats);
  return ReferenceAudioEmbedding{emb.value()};
}

nn::Tensor embed_text_prompt(const std::string& text,
                             clients::TextEncoderClient& client) {
  if (text.empty()) throw EmptyTextError("empty text prompt");
  nn::Tensor rows = client.embed(text);
  if (rows.rows() == 0) throw EmptyTextError("text prompt has no tokens");
  return rows;
}

nn::Tensor embed_visual_prompt(const Image* image,
                               const std::vector<Image>* video,
                               const std::string* caption,
                               clients::VisionEncoderClient& vision,
                               clients::TextEncoderClient& text) {
  std::vector<nn::Tensor> parts;
  if (image != nullptr) parts.push_back(vision.embed_image(*image));
  if (video != nullptr && !video->empty()) {
    parts.push_back(vision.embed_video(*video));
  }
  if (caption != nullptr && !caption->empty()) {
    parts.push_back(embed_text_prompt(*caption, text));
  }
  if (parts.empty()) {
    throw AllVisualInputsMissingError(
        "visual prompt needs an image, video, or caption");
  }
  return concat_row_tensors(parts);
}

nn::Tensor query_encode(const nn::Tensor& modality_rows,
                        const MPEModel& model) {
  if (modality_rows.rows() == 0) {
    throw EmptySequenceError("query encoder input is empty");
  }
  if (modality_rows.cols() != model.cfg.q_hidden) {
    throw DimensionMismatchError("query encoder input width");
  }
  Var out =
      run_query_stack(frozen_ctx(model), model.cfg, Var::constant(modality_rows));
  return out.value();
}

nn::Var bundle_context_var(const PromptBundle& bundle,
                           const PromptClients& clients, const MPEModel& model,
                           const nn::ParamCtx& P) {
  bundle.validate();
  const MPEConfig& cfg = model.cfg;

  auto need_text = [&clients]() -> clients::TextEncoderClient& {
    if (clients.text == nullptr) {
      throw ClientUnavailableError("no text encoder client configured");
    }
    return *clients.text;
  };
  auto need_vision = [&clients]() -> clients::VisionEncoderClient& {
    if (clients.vision == nullptr) {
      throw ClientUnavailableError("no vision encoder client configured");
    }
    return *clients.vision;
  };

  std::vector<Var> groups;
  groups.reserve(kNumModalities);
  for (const char* name : kModalityOrder) {
    const std::string mn(name);
    Var feats;  // [n, feature_dim], only built when the modality is enabled
    if (mn == "text" && bundle.use_text) {
      feats = Var::constant(embed_text_prompt(*bundle.text, need_text()));
    } else if (mn == "audio" && bundle.use_audio) {
      // Frozen here: the reference encoder defines the embedding space the
      // prior denoises in; only stage-1/2 training updates it.
      feats = reference_audio_embedding_var(
          fit_prompt_window(*bundle.audio, cfg), frozen_ctx(model), cfg,
          model.feat_cfg, model.feat_mats);
    } else if (mn == "image" && bundle.use_image) {
      feats = Var::constant(need_vision().embed_image(*bundle.image));
    } else if (mn == "video" && bundle.use_video) {
      feats = Var::constant(need_vision().embed_video(*bundle.video));
    } else if (mn == "face_caption" && bundle.use_face_caption) {
      feats =
          Var::constant(embed_text_prompt(*bundle.face_caption, need_text()));
    }

    if (feats.defined()) {
      if (feats.value().cols() != modality_feature_dim(cfg, mn)) {
        throw DimensionMismatchError("client embedding width for " + mn);
      }
      Var rows = linear(P, "q.proj." + mn, feats);
      groups.push_back(nn::add_rowvec(rows, P("q.type." + mn)));
    } else {
      groups.push_back(P("q.null." + mn));
    }
  }
  return run_query_stack(P, cfg, nn::concat_rows(groups));
}

PriorForward prior_forward_var(const PromptBundle& bundle,
                               const PromptClients& clients,
                               const nn::Tensor& x0, const MPEModel& model,
                               const nn::ParamCtx& P, std::uint64_t seed) {
  const MPEConfig& cfg = model.cfg;
  if (x0.rank() != 2 || x0.rows() != 1 || x0.cols() != cfg.d_cond) {
    throw DimensionMismatchError("x0 must be [1, d_cond]");
  }
  Rng rng(seed);
  const int total = model.schedule.steps();
  const int step = 1 + (int)rng.uniform_int((uint64_t)total);
  const double ab = model.schedule.alpha_bar[(size_t)step];
  const double a = std::sqrt(ab), b = std::sqrt(1.0 - ab);

  nn::Tensor x_t({1, cfg.d_cond});
  for (int j = 0; j < cfg.d_cond; ++j) {
    x_t.at(0, j) = a * x0.at(0, j) + b * rng.gaussian();
  }

  Var context = bundle_context_var(bundle, clients, model, P);
  Var x0_hat = predict_x0(P, cfg, context, Var::constant(x_t), step, total);
  Var loss = nn::mse_loss(x0_hat, Var::constant(x0));
  return PriorForward{loss, x0_hat, step};
}

std::vector<std::string> prior_trainable_names(const MPEModel& model) {
  std::vector<std::string> names = model.params.names_with_prefix("q.");
  for (auto& n : model.params.names_with_prefix("prior.")) {
    names.push_back(n);
  }
  return names;
}

double prior_train_step(const PromptBundle& bundle,
                        const PromptClients& clients, const nn::Tensor& x0,
                        MPEModel& model, nn::AdamW& opt, double lr,
                        std::uint64_t seed) {
  model.params.zero_grads();
  nn::ParamCtx P{&model.params, false};
  PriorForward fwd = prior_forward_var(bundle, clients, x0, model, P, seed);
  const double loss = fwd.loss.value().at(0);
  nn::backward(fwd.loss);
  opt.step(model.params, lr, prior_trainable_names(model));
  return loss;
}

ConditionEmbedding sample_condition(const PromptBundle& bundle,
                                    const PromptClients& clients,
                                    const MPEModel* model, Stage stage,
                                    std::uint64_t seed) {
  if (model == nullptr) {
    throw StageModelMissingError("no prompt encoder for " + stage_name(stage));
  }
  if (model->stage != stage) {
    throw StageModelMissingError("prompt encoder belongs to " +
                                 stage_name(model->stage) + ", requested " +
                                 stage_name(stage));
  }
  bundle.validate();
  const MPEConfig& cfg = model->cfg;
  const DiffusionSchedule& sch = model->schedule;
  const int total = sch.steps();
  nn::ParamCtx P = frozen_ctx(*model);

  Rng rng(seed);
  nn::Tensor x({1, cfg.d_cond});
  for (int j = 0; j < cfg.d_cond; ++j) x.at(0, j) = rng.gaussian();

  // The prompt context does not depend on the diffusion state.
  Var context = bundle_context_var(bundle, clients, *model, P);

  for (int i = total; i >= 1; --i) {
    Var x0_hat =
        predict_x0(P, cfg, context, Var::constant(x), i, total);
    const nn::Tensor& x0t = x0_hat.value();
    if (!x0t.all_finite()) {
      throw NonFiniteStateError("denoiser output at step " +
                                std::to_string(i));
    }
    const double ab_i = sch.alpha_bar[(size_t)i];
    const double ab_prev = sch.alpha_bar[(size_t)i - 1];
    const double beta_i = sch.beta[(size_t)i];
    const double alpha_i = 1.0 - beta_i;
    const double c0 = std::sqrt(ab_prev) * beta_i / (1.0 - ab_i);
    const double c1 = std::sqrt(alpha_i) * (1.0 - ab_prev) / (1.0 - ab_i);
    const double var = (1.0 - ab_prev) / (1.0 - ab_i) * beta_i;
    const double noise_scale = i > 1 ? std::sqrt(var) : 0.0;
    for (int j = 0; j < cfg.d_cond; ++j) {
      x.at(0, j) = c0 * x0t.at(0, j) + c1 * x.at(0, j) +
                   noise_scale * rng.gaussian();
    }
    if (!x.all_finite()) {
      throw NonFiniteStateError("diffusion state at step " +
                                std::to_string(i - 1));
    }
  }
  return ConditionEmbedding{x, stage};
}

void save_mpe(const MPEModel& model, const std::string& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json j;
  j["type"] = "mpe";
  j["stage"] = stage_name(model.stage);
  j["d_cond"] = model.cfg.d_cond;
  j["ref_blocks"] = model.cfg.ref_blocks;
  j["ref_heads"] = model.cfg.ref_heads;
  j["ref_ffn"] = model.cfg.ref_ffn;
  j["prompt_seconds"] = model.cfg.prompt_seconds;
  j["sample_rate"] = model.cfg.sample_rate;
  j["num_queries"] = model.cfg.num_queries;
  j["q_hidden"] = model.cfg.q_hidden;
  j["q_layers"] = model.cfg.q_layers;
  j["q_heads"] = model.cfg.q_heads;
  j["q_ffn"] = model.cfg.q_ffn;
  j["d_modality"] = model.cfg.d_modality;
  j["prior_blocks"] = model.cfg.prior_blocks;
  j["prior_heads"] = model.cfg.prior_heads;
  j["prior_ffn"] = model.cfg.prior_ffn;
  j["diffusion_steps"] = model.cfg.diffusion_steps;
  const std::string cfg_tmp = dir + "/config.json.tmp";
  {
    std::ofstream f(cfg_tmp);
    f << j.dump(2) << "\n";
  }
  std::filesystem::rename(cfg_tmp, dir + "/config.json");
  model.params.save(dir + "/params.fls");
}

MPEModel load_mpe(const std::string& dir) {
  std::ifstream f(dir + "/config.json");
  if (!f) throw IoError("missing prompt encoder config in " + dir);
  nlohmann::json j = nlohmann::json::parse(f);
  MPEConfig cfg;
  cfg.d_cond = j.at("d_cond").get<int>();
  cfg.ref_blocks = j.at("ref_blocks").get<int>();
  cfg.ref_heads = j.at("ref_heads").get<int>();
  cfg.ref_ffn = j.at("ref_ffn").get<int>();
  cfg.prompt_seconds = j.at("prompt_seconds").get<double>();
  cfg.sample_rate = j.at("sample_rate").get<int>();
  cfg.num_queries = j.at("num_queries").get<int>();
  cfg.q_hidden = j.at("q_hidden").get<int>();
  cfg.q_layers = j.at("q_layers").get<int>();
  cfg.q_heads = j.at("q_heads").get<int>();
  cfg.q_ffn = j.at("q_ffn").get<int>();
  cfg.d_modality = j.at("d_modality").get<int>();
  cfg.prior_blocks = j.at("prior_blocks").get<int>();
  cfg.prior_heads = j.at("prior_heads").get<int>();
  cfg.prior_ffn = j.at("prior_ffn").get<int>();
  cfg.diffusion_steps = j.at("diffusion_steps").get<int>();

  MPEModel m;
  m.cfg = cfg;
  m.stage = stage_from_name(j.at("stage").get<std::string>());
  m.schedule = DiffusionSchedule::cosine(cfg.diffusion_steps);
  m.feat_cfg.sample_rate = cfg.sample_rate;
  m.feat_mats = dsp::make_filterbank(m.feat_cfg);
  m.params.load(dir + "/params.fls");
  return m;
}

}  // namespace mpe
}  // namespace flespeech
