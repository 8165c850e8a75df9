// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#ifndef FLESPEECH_FM_FM_H_
#define FLESPEECH_FM_FM_H_

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "flespeech/codec/codec.h"
#include "flespeech/nn/params.h"
#include "flespeech/stage.h"
#include "flespeech/tokenizer/tokenizer.h"

namespace flespeech {
namespace fm {

// Velocity-field transformer over latent frames. Trains on the linear
// (rectified) path x_t = (1-t) z + t x1 whose target velocity x1 - z is
// constant in t.
struct FMConfig {
  int layers = 4;
  int heads = 4;
  int hidden = 128;
  int ffn = 512;
  int d_lat = 64;
  int d_cond = 64;
  int k_tokens = 300;
  double latent_rate_hz = 50.0;
  int ode_steps = 32;
  // Guidance scale 1.0 disables classifier-free guidance.
  double cfg_scale = 1.0;
  // Probability of replacing the condition with the learned null embedding
  // during training, which is what makes guidance meaningful at sampling.
  double cond_drop_prob = 0.1;
};

// Published full-scale sizes, stored verbatim (768 is not divisible by 128;
// the preset is data, not a runnable desk configuration).
FMConfig fm_reference_config();

struct FMModel {
  FMConfig cfg;
  nn::ParamStore params;

  static FMModel init(const FMConfig& cfg, uint64_t seed);
};

struct FlowState {
  nn::Tensor x_t;  // [T_lat, D_lat]
  double t = 0.0;
};

// x_t = (1-t) z + t x1, elementwise.
nn::Tensor flow_interpolant(const nn::Tensor& x1, const nn::Tensor& z,
                            double t);

// Samples t uniformly and z from a standard Gaussian; returns the state and
// the constant target velocity x1 - z.
std::pair<FlowState, nn::Tensor> make_training_pair(
    const codec::AcousticLatentSequence& x1, uint64_t noise_seed);

// Repeats each token by round(latent_rate / token_rate), then pads with the
// final token or truncates to exactly t_lat. A mismatch larger than
// max(4, 2 * factor) frames raises LengthAlignmentError.
std::vector<int> align_tokens_to_latents(
    const tokenizer::SemanticTokenSequence& tokens, double latent_rate_hz,
    int t_lat);

// Predicted velocity v(x_t, t, tokens, condition), shape [T_lat, D_lat].
nn::Var fm_velocity(const std::vector<int>& aligned_tokens, const nn::Var& x_t,
                    double t, const nn::Var& condition, const nn::ParamCtx& P,
                    const FMConfig& cfg);

struct FMLossReport {
  double loss = 0.0;
  bool condition_dropped = false;
};

// MSE between predicted and target velocity at a seeded (t, z) draw. When
// `train_mode` is set, the condition is replaced by the null embedding with
// cond_drop_prob. Differentiable in the condition.
nn::Var fm_loss_var(const tokenizer::SemanticTokenSequence& tokens,
                    const nn::Var& condition,
                    const codec::AcousticLatentSequence& x1,
                    const nn::ParamCtx& P, const FMConfig& cfg, uint64_t seed,
                    bool train_mode, FMLossReport* report = nullptr);

FMLossReport fm_loss(const tokenizer::SemanticTokenSequence& tokens,
                     const ConditionEmbedding& condition,
                     const codec::AcousticLatentSequence& x1,
                     const FMModel& model, uint64_t seed);

// Fixed-step Euler integration from t=0 to t=1; exactly `steps` field
// evaluations, each at t = k/steps. Raises NonFiniteState if a step leaves
// the finite domain.
using VelocityField =
    std::function<nn::Tensor(const nn::Tensor& x, double t)>;
nn::Tensor ode_integrate(const VelocityField& field, const nn::Tensor& x0,
                         int steps);

// Draws the initial noise from `seed` and integrates the learned field.
// T_lat is the aligned token length.
codec::AcousticLatentSequence ode_sample(
    const tokenizer::SemanticTokenSequence& tokens,
    const ConditionEmbedding& condition, const FMModel& model, uint64_t seed);

void save_fm(const std::string& dir, const FMModel& model);
FMModel load_fm(const std::string& dir);

}  // namespace fm
}  // namespace flespeech

#endif  // FLESPEECH_FM_FM_H_
