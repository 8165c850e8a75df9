// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#ifndef FLESPEECH_DSP_FILTERBANK_H_
#define FLESPEECH_DSP_FILTERBANK_H_

#include "flespeech/audio/audio_clip.h"
#include "flespeech/nn/ops.h"
#include "flespeech/nn/tensor.h"

namespace flespeech {
namespace dsp {

// Frame-level log filterbank energies. Defaults: 25 ms window, 20 ms hop,
// 80 triangular bands on a mel-spaced grid up to Nyquist.
struct FeatureConfig {
  int sample_rate = 16000;
  int window = 400;
  int hop = 320;
  int num_bands = 80;
  double log_floor = 1e-6;

  double frame_rate_hz() const {
    return (double)sample_rate / (double)hop;
  }
};

// Precomputed constants for one FeatureConfig. The DFT is materialized as
// dense cos/sin matrices so the same arithmetic serves both the plain
// extractor and the differentiable reconstruction loss.
struct FilterbankMatrices {
  nn::Tensor hann;     // [1, window]
  nn::Tensor dft_cos;  // [window, window/2 + 1]
  nn::Tensor dft_sin;  // [window, window/2 + 1]
  nn::Tensor mel;      // [window/2 + 1, num_bands]
};

FilterbankMatrices make_filterbank(const FeatureConfig& cfg);

// Triangular mel-spaced filters; rows index DFT bins of an n-point frame.
nn::Tensor mel_filter_matrix(int window, int sample_rate, int num_bands);

// Log filterbank energies of every complete frame, as an autograd node so
// gradients can flow back into the samples. `samples` is rank-1; frames
// beyond the signal end read zeros.
nn::Var log_mel_frames_var(const nn::Var& samples, const FeatureConfig& cfg,
                           const FilterbankMatrices& mats);

// Plain-tensor wrapper. Clips shorter than one window are zero-padded to a
// single frame so the output always has at least one row.
nn::Tensor log_mel_frames(const AudioClip& clip, const FeatureConfig& cfg);

// Frame count for a clip of n samples under cfg (after short-clip padding).
int feature_frame_count(size_t n, const FeatureConfig& cfg);

}  // namespace dsp
}  // namespace flespeech

#endif  // FLESPEECH_DSP_FILTERBANK_H_
