// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#include "flespeech/fm/fm.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "flespeech/common/error.h"
#include "flespeech/common/rng.h"
#include "flespeech/nn/ops.h"
#include "flespeech/nn/transformer.h"

namespace flespeech {
namespace fm {

namespace {

using nn::Var;

nn::BlockConfig block_config(const FMConfig& cfg) {
  return nn::BlockConfig{cfg.hidden, cfg.heads, cfg.ffn};
}

void check_stage(const ConditionEmbedding& condition, const FMConfig& cfg) {
  if (condition.source_stage != Stage::acoustic) {
    throw StageMismatchError("condition produced for " +
                             stage_name(condition.source_stage));
  }
  if (condition.vector.size() != cfg.d_cond) {
    throw DimensionMismatchError("condition dimension mismatch");
  }
}

nn::Tensor gaussian_like(int rows, int cols, Rng& rng) {
  nn::Tensor z = nn::Tensor::zeros({rows, cols});
  for (double& v : z.vec()) v = rng.gaussian();
  return z;
}

}  // namespace

FMConfig fm_reference_config() {
  FMConfig cfg;
  cfg.layers = 12;
  cfg.heads = 128;
  cfg.hidden = 768;
  return cfg;
}

FMModel FMModel::init(const FMConfig& cfg, uint64_t seed) {
  FMModel m;
  m.cfg = cfg;
  Rng rng(seed);
  const double std = 0.02;
  m.params.create_gaussian("fm.tok_emb", {cfg.k_tokens, cfg.hidden}, rng, std);
  m.params.create_gaussian("fm.x.w", {cfg.d_lat, cfg.hidden}, rng, std);
  m.params.create_full("fm.x.b", {cfg.hidden}, 0.0);
  m.params.create_gaussian("fm.time.w", {cfg.hidden, cfg.hidden}, rng, std);
  m.params.create_full("fm.time.b", {cfg.hidden}, 0.0);
  m.params.create_gaussian("fm.cond.w", {cfg.d_cond, cfg.hidden}, rng, std);
  m.params.create_full("fm.cond.b", {cfg.hidden}, 0.0);
  m.params.create_gaussian("fm.null_cond", {1, cfg.d_cond}, rng, std);
  nn::init_stack(m.params, "fm.stack", cfg.layers, block_config(cfg), rng);
  m.params.create_gaussian("fm.head.w", {cfg.hidden, cfg.d_lat}, rng, std);
  m.params.create_full("fm.head.b", {cfg.d_lat}, 0.0);
  return m;
}

nn::Tensor flow_interpolant(const nn::Tensor& x1, const nn::Tensor& z,
                            double t) {
  if (!x1.same_shape(z)) throw DimensionMismatchError("x1/z shape mismatch");
  nn::Tensor out = x1;
  for (size_t i = 0; i < out.vec().size(); ++i) {
    out.vec()[i] = (1.0 - t) * z.vec()[i] + t * x1.vec()[i];
  }
  return out;
}

std::pair<FlowState, nn::Tensor> make_training_pair(
    const codec::AcousticLatentSequence& x1, uint64_t noise_seed) {
  if (!x1.latents.all_finite()) {
    throw NonFiniteStateError("target latents are not finite");
  }
  Rng rng(noise_seed);
  const double t = rng.uniform();
  nn::Tensor z = gaussian_like(x1.latents.rows(), x1.latents.cols(), rng);
  FlowState state;
  state.t = t;
  state.x_t = flow_interpolant(x1.latents, z, t);
  nn::Tensor u = x1.latents;
  for (size_t i = 0; i < u.vec().size(); ++i) u.vec()[i] -= z.vec()[i];
  return {state, u};
}

std::vector<int> align_tokens_to_latents(
    const tokenizer::SemanticTokenSequence& tokens, double latent_rate_hz,
    int t_lat) {
  if (tokens.tokens.empty()) throw EmptySequenceError("no tokens to align");
  int factor = 1;
  if (tokens.frame_rate_hz > 0.0) {
    factor = (int)std::lround(latent_rate_hz / tokens.frame_rate_hz);
    if (factor < 1) factor = 1;
  }
  std::vector<int> aligned;
  aligned.reserve(tokens.tokens.size() * (size_t)factor);
  for (int tok : tokens.tokens) {
    for (int r = 0; r < factor; ++r) aligned.push_back(tok);
  }
  const int slack = std::max(4, 2 * factor);
  const int len = (int)aligned.size();
  if (std::abs(len - t_lat) > slack) {
    throw LengthAlignmentError("token/latent length mismatch beyond slack");
  }
  if (len > t_lat) {
    aligned.resize((size_t)t_lat);
  } else {
    while ((int)aligned.size() < t_lat) aligned.push_back(aligned.back());
  }
  return aligned;
}

nn::Var fm_velocity(const std::vector<int>& aligned_tokens, const nn::Var& x_t,
                    double t, const nn::Var& condition, const nn::ParamCtx& P,
                    const FMConfig& cfg) {
  const int t_lat = (int)aligned_tokens.size();
  Var tok = nn::gather_rows(P("fm.tok_emb"), aligned_tokens);
  Var x = nn::add_rowvec(nn::matmul(x_t, P("fm.x.w")), P("fm.x.b"));
  Var time_row = nn::add_rowvec(
      nn::matmul(Var::constant(nn::sinusoidal_time(t, cfg.hidden)),
                 P("fm.time.w")),
      P("fm.time.b"));
  Var cond_row =
      nn::add_rowvec(nn::matmul(condition, P("fm.cond.w")), P("fm.cond.b"));
  Var h = nn::add(nn::add(tok, x),
                  nn::add(nn::tile_rows(time_row, t_lat),
                          nn::tile_rows(cond_row, t_lat)));
  h = nn::add(h, Var::constant(nn::sinusoidal_positions(t_lat, cfg.hidden)));
  h = nn::stack_forward(P, "fm.stack", cfg.layers, block_config(cfg), h,
                        nullptr);
  return nn::add_rowvec(nn::matmul(h, P("fm.head.w")), P("fm.head.b"));
}

nn::Var fm_loss_var(const tokenizer::SemanticTokenSequence& tokens,
                    const nn::Var& condition,
                    const codec::AcousticLatentSequence& x1,
                    const nn::ParamCtx& P, const FMConfig& cfg, uint64_t seed,
                    bool train_mode, FMLossReport* report) {
  std::vector<int> aligned =
      align_tokens_to_latents(tokens, cfg.latent_rate_hz, x1.latents.rows());
  Rng rng(seed);
  const double t = rng.uniform();
  nn::Tensor z = gaussian_like(x1.latents.rows(), x1.latents.cols(), rng);
  nn::Tensor x_t = flow_interpolant(x1.latents, z, t);
  nn::Tensor u = x1.latents;
  for (size_t i = 0; i < u.vec().size(); ++i) u.vec()[i] -= z.vec()[i];

  Var cond = condition;
  bool dropped = false;
  if (train_mode && cfg.cond_drop_prob > 0.0 &&
      rng.uniform() < cfg.cond_drop_prob) {
    cond = P("fm.null_cond");
    dropped = true;
  }
  Var pred = fm_velocity(aligned, Var::constant(x_t), t, cond, P, cfg);
  Var loss = nn::mse_loss(pred, Var::constant(u));
  if (report != nullptr) {
    report->loss = loss.value().at(0);
    report->condition_dropped = dropped;
  }
  return loss;
}

FMLossReport fm_loss(const tokenizer::SemanticTokenSequence& tokens,
                     const ConditionEmbedding& condition,
                     const codec::AcousticLatentSequence& x1,
                     const FMModel& model, uint64_t seed) {
  check_stage(condition, model.cfg);
  nn::ParamCtx P{const_cast<nn::ParamStore*>(&model.params), true};
  FMLossReport report;
  fm_loss_var(tokens, Var::constant(condition.vector), x1, P, model.cfg, seed,
              /*train_mode=*/false, &report);
  return report;
}

nn::Tensor ode_integrate(const VelocityField& field, const nn::Tensor& x0,
                         int steps) {
  if (steps < 1) throw StepOutOfRangeError("ode_steps must be >= 1");
  nn::Tensor x = x0;
  const double dt = 1.0 / steps;
  for (int k = 0; k < steps; ++k) {
    const double t = (double)k / steps;
    nn::Tensor v = field(x, t);
    if (!v.same_shape(x)) {
      throw DimensionMismatchError("velocity shape mismatch");
    }
    for (size_t i = 0; i < x.vec().size(); ++i) x.vec()[i] += dt * v.vec()[i];
    if (!x.all_finite()) {
      throw NonFiniteStateError("ODE state left the finite domain");
    }
  }
  return x;
}

codec::AcousticLatentSequence ode_sample(
    const tokenizer::SemanticTokenSequence& tokens,
    const ConditionEmbedding& condition, const FMModel& model, uint64_t seed) {
  const FMConfig& cfg = model.cfg;
  check_stage(condition, cfg);
  if (tokens.tokens.empty()) throw EmptySequenceError("no tokens to sample");
  int factor = 1;
  if (tokens.frame_rate_hz > 0.0) {
    factor = std::max(
        1, (int)std::lround(cfg.latent_rate_hz / tokens.frame_rate_hz));
  }
  const int t_lat = (int)tokens.tokens.size() * factor;
  std::vector<int> aligned =
      align_tokens_to_latents(tokens, cfg.latent_rate_hz, t_lat);

  nn::ParamCtx P{const_cast<nn::ParamStore*>(&model.params), true};
  Var cond = Var::constant(condition.vector);
  Var null_cond = P("fm.null_cond");

  VelocityField field = [&](const nn::Tensor& x, double t) {
    Var xt = Var::constant(x);
    nn::Tensor v_cond = fm_velocity(aligned, xt, t, cond, P, cfg).value();
    if (cfg.cfg_scale == 1.0) return v_cond;
    nn::Tensor v_null = fm_velocity(aligned, xt, t, null_cond, P, cfg).value();
    nn::Tensor v = v_cond;
    for (size_t i = 0; i < v.vec().size(); ++i) {
      v.vec()[i] =
          v_null.vec()[i] + cfg.cfg_scale * (v_cond.vec()[i] - v_null.vec()[i]);
    }
    return v;
  };

  Rng rng(seed);
  nn::Tensor x0 = gaussian_like(t_lat, cfg.d_lat, rng);
  codec::AcousticLatentSequence out;
  out.latents = ode_integrate(field, x0, cfg.ode_steps);
  out.frame_rate_hz = cfg.latent_rate_hz;
  return out;
}

void save_fm(const std::string& dir, const FMModel& model) {
  std::filesystem::create_directories(dir);
  nlohmann::json j;
  j["type"] = "fm";
  j["layers"] = model.cfg.layers;
  j["heads"] = model.cfg.heads;
  j["hidden"] = model.cfg.hidden;
  j["ffn"] = model.cfg.ffn;
  j["d_lat"] = model.cfg.d_lat;
  j["d_cond"] = model.cfg.d_cond;
  j["k_tokens"] = model.cfg.k_tokens;
  j["latent_rate_hz"] = model.cfg.latent_rate_hz;
  j["ode_steps"] = model.cfg.ode_steps;
  j["cfg_scale"] = model.cfg.cfg_scale;
  j["cond_drop_prob"] = model.cfg.cond_drop_prob;
  const std::string tmp = dir + "/config.json.tmp";
  {
    std::ofstream f(tmp);
    f << j.dump(2) << "\n";
  }
  std::filesystem::rename(tmp, dir + "/config.json");
  model.params.save(dir + "/params.fls");
}

FMModel load_fm(const std::string& dir) {
  std::ifstream f(dir + "/config.json");
  if (!f) throw IoError("missing fm config in " + dir);
  nlohmann::json j = nlohmann::json::parse(f);
  FMConfig cfg;
  cfg.layers = j.at("layers").get<int>();
  cfg.heads = j.at("heads").get<int>();
  cfg.hidden = j.at("hidden").get<int>();
  cfg.ffn = j.at("ffn").get<int>();
  cfg.d_lat = j.at("d_lat").get<int>();
  cfg.d_cond = j.at("d_cond").get<int>();
  cfg.k_tokens = j.at("k_tokens").get<int>();
  cfg.latent_rate_hz = j.at("latent_rate_hz").get<double>();
  cfg.ode_steps = j.at("ode_steps").get<int>();
  cfg.cfg_scale = j.at("cfg_scale").get<double>();
  cfg.cond_drop_prob = j.at("cond_drop_prob").get<double>();
  FMModel m;
  m.cfg = cfg;
  m.params.load(dir + "/params.fls");
  return m;
}

}  // namespace fm
}  // namespace flespeech
