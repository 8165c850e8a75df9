// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#ifndef FLESPEECH_MPE_MPE_H_
#define FLESPEECH_MPE_MPE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "flespeech/audio/audio_clip.h"
#include "flespeech/clients/clients.h"
#include "flespeech/dsp/filterbank.h"
#include "flespeech/mpe/prompt_bundle.h"
#include "flespeech/nn/optim.h"
#include "flespeech/nn/params.h"
#include "flespeech/nn/transformer.h"
#include "flespeech/stage.h"

namespace flespeech {
namespace mpe {

// Multimodal prompt encoder: per-modality features, a query-based
// cross-attention encoder, and a diffusion prior that denoises toward the
// clean reference-audio embedding. One full model per generation stage;
// parameters are never shared across stages.
struct MPEConfig {
  int d_cond = 64;  // reference embedding and condition dimension

  // Reference audio encoder: self-attention over log-mel frames at hidden
  // d_cond, mean-pooled to one global vector.
  int ref_blocks = 2;
  int ref_heads = 4;
  int ref_ffn = 256;
  double prompt_seconds = 6.0;
  int sample_rate = 16000;

  // Query encoder.
  int num_queries = 4;
  int q_hidden = 64;
  int q_layers = 2;
  int q_heads = 4;
  int q_ffn = 256;
  int d_modality = 32;  // text/vision client embedding width

  // Diffusion prior denoiser (self-attention over queries + state rows).
  int prior_blocks = 2;
  int prior_heads = 4;
  int prior_ffn = 256;
  int diffusion_steps = 100;
};

// Published large-scale preset: 16 queries; 6-layer, 6-head query encoder
// with intermediate size 256; reference audio encoder of 6 attention blocks
// at hidden 512. Not sized for the test suite.
MPEConfig mpe_reference_config();

// Discrete-time cosine noise schedule, x0-prediction parameterization.
// alpha_bar[0] = 1; indices 1..steps are usable diffusion steps.
struct DiffusionSchedule {
  std::vector<double> beta;       // beta[i], i in [1, steps]; beta[0] unused
  std::vector<double> alpha_bar;  // cumulative products, [0, steps]

  int steps() const { return (int)beta.size() - 1; }

  static DiffusionSchedule cosine(int steps, double s = 0.008);
};

// Global embedding of a reference clip, [1, d_cond]. Serves as the diffusion
// target x0 and as the audio-modality feature for the query encoder.
struct ReferenceAudioEmbedding {
  nn::Tensor vector;
};

struct MPEModel {
  MPEConfig cfg;
  Stage stage = Stage::lm;
  nn::ParamStore params;
  DiffusionSchedule schedule;
  dsp::FeatureConfig feat_cfg;
  dsp::FilterbankMatrices feat_mats;

  static MPEModel init(const MPEConfig& cfg, Stage stage, std::uint64_t seed);
};

// Pluggable pretrained encoders for text and visual prompts.
struct PromptClients {
  clients::TextEncoderClient* text = nullptr;
  clients::VisionEncoderClient* vision = nullptr;
};

// Crops or zero-pads to exactly prompt_seconds. Throws EmptyAudio /
// SampleRateMismatch.
AudioClip fit_prompt_window(const AudioClip& audio, const MPEConfig& cfg);

// Differentiable reference encoder over an already-fitted clip.
nn::Var reference_audio_embedding_var(const AudioClip& fitted,
                                      const nn::ParamCtx& P,
                                      const MPEConfig& cfg,
                                      const dsp::FeatureConfig& feat_cfg,
                                      const dsp::FilterbankMatrices& mats);

// Frozen-weight convenience wrapper; fits the prompt window itself.
ReferenceAudioEmbedding encode_reference_audio(const AudioClip& audio,
                                               const MPEModel& model);

// One row per sub-token of the client's tokenizer, [n, client.dim()].
// Throws EmptyText; remote clients may throw ClientUnavailable.
nn::Tensor embed_text_prompt(const std::string& text,
                             clients::TextEncoderClient& client);

// Static image rows, then per-frame video rows, then caption rows; absent
// parts omitted. Throws AllVisualInputsMissing when every input is null.
nn::Tensor embed_visual_prompt(const Image* image,
                               const std::vector<Image>* video,
                               const std::string* caption,
                               clients::VisionEncoderClient& vision,
                               clients::TextEncoderClient& text);

// Cross-attention of the learned queries over rows already in encoder space
// ([n, q_hidden]). Throws EmptySequence on zero rows, DimensionMismatch on
// wrong width. Frozen weights.
nn::Tensor query_encode(const nn::Tensor& modality_rows, const MPEModel& model);

// Full prompt context [num_queries, q_hidden]. Enabled modalities pass
// through client features, a per-modality projection, and a type embedding;
// absent ones contribute a learned null row, so outputs are exactly
// invariant to the contents of masked fields. The reference audio encoder
// inside is always run frozen.
nn::Var bundle_context_var(const PromptBundle& bundle,
                           const PromptClients& clients, const MPEModel& model,
                           const nn::ParamCtx& P);

struct PriorForward {
  nn::Var loss;    // MSE(x0_hat, x0) at the sampled step
  nn::Var x0_hat;  // [1, d_cond], differentiable
  int step = 0;    // sampled diffusion step in [1, steps]
};

// Noises x0 at a seeded random step and predicts it back. x0 is [1, d_cond].
PriorForward prior_forward_var(const PromptBundle& bundle,
                               const PromptClients& clients,
                               const nn::Tensor& x0, const MPEModel& model,
                               const nn::ParamCtx& P, std::uint64_t seed);

// Names of the parameters the prior objective trains (query encoder,
// projections, null embeddings, denoiser). The reference encoder is not
// included; it defines the target space.
std::vector<std::string> prior_trainable_names(const MPEModel& model);

// One optimization step; returns the scalar loss.
double prior_train_step(const PromptBundle& bundle,
                        const PromptClients& clients, const nn::Tensor& x0,
                        MPEModel& model, nn::AdamW& opt, double lr,
                        std::uint64_t seed);

// Ancestral denoising from seeded Gaussian noise to a condition embedding.
// `model` may be null or belong to another stage: StageModelMissing.
ConditionEmbedding sample_condition(const PromptBundle& bundle,
                                    const PromptClients& clients,
                                    const MPEModel* model, Stage stage,
                                    std::uint64_t seed);

void save_mpe(const MPEModel& model, const std::string& dir);
MPEModel load_mpe(const std::string& dir);

}  // namespace mpe
}  // namespace flespeech

#endif  // FLESPEECH_MPE_MPE_H_
