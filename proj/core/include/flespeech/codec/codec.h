// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#ifndef FLESPEECH_CODEC_CODEC_H_
#define FLESPEECH_CODEC_CODEC_H_

#include <cstdint>
#include <string>
#include <vector>

#include "flespeech/audio/audio_clip.h"
#include "flespeech/dsp/filterbank.h"
#include "flespeech/nn/optim.h"
#include "flespeech/nn/params.h"
#include "flespeech/nn/tensor.h"

namespace flespeech {
namespace codec {

// Waveform VAE over non-overlapping frames of `downsample` samples. Encoder
// and decoder are frame-wise conv stacks (kernel == stride == downsample,
// then pointwise layers), so one latent frame corresponds to exactly
// `downsample` output samples.
struct CodecConfig {
  int d_lat = 64;
  int downsample = 320;
  double kl_weight = 1e-4;
  int hidden = 256;
  int sample_rate = 16000;

  double latent_rate_hz() const {
    return (double)sample_rate / (double)downsample;
  }
};

struct AcousticLatentSequence {
  nn::Tensor latents;  // [T_lat, D_lat]
  double frame_rate_hz = 0.0;
};

struct CodecModel {
  CodecConfig cfg;
  nn::ParamStore params;

  static CodecModel init(const CodecConfig& cfg, uint64_t seed);
};

// Posterior mean; deterministic. T_lat = ceil(samples / downsample).
AcousticLatentSequence encode_latent(const AudioClip& audio,
                                     const CodecModel& model);

// Output length is exactly T_lat * downsample samples.
AudioClip decode_audio(const AcousticLatentSequence& latents,
                       const CodecModel& model);

struct CodecLossReport {
  double total = 0.0;
  double reconstruction = 0.0;  // waveform L1 + filterbank L2
  double kl = 0.0;
  // total == reconstruction + kl_weight * kl by construction
};

// Full training graph: reparameterized sample, L1 waveform loss, L2 loss on
// log filterbank features, KL to the unit Gaussian. Deterministic per seed.
nn::Var codec_loss_var(const std::vector<AudioClip>& batch,
                       const nn::ParamCtx& P, const CodecConfig& cfg,
                       const dsp::FilterbankMatrices& mats, uint64_t seed,
                       CodecLossReport* report);

CodecLossReport codec_train_step(const std::vector<AudioClip>& batch,
                                 CodecModel& model, nn::AdamW& opt, double lr,
                                 uint64_t seed);

// Checkpoint directory: params.fls plus config.json.
void save_codec(const std::string& dir, const CodecModel& model);
CodecModel load_codec(const std::string& dir);

}  // namespace codec
}  // namespace flespeech

#endif  // FLESPEECH_CODEC_CODEC_H_
