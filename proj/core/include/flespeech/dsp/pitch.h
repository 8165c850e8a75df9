// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#ifndef FLESPEECH_DSP_PITCH_H_
#define FLESPEECH_DSP_PITCH_H_

#include <vector>

#include "flespeech/audio/audio_clip.h"

namespace flespeech {
namespace dsp {

// Frame-wise autocorrelation pitch tracker. Frames are non-overlapping by
// default so that appending whole frames of silence cannot disturb the
// statistics of earlier frames; only complete frames are analyzed.
struct PitchConfig {
  int sample_rate = 16000;
  int frame = 640;  // 40 ms
  int hop = 640;
  double fmin_hz = 50.0;
  double fmax_hz = 500.0;
  // Voicing decision: normalized autocorrelation peak must exceed this.
  double voicing_threshold = 0.3;
};

struct PitchTrack {
  std::vector<double> pitch_hz;  // 0 marks an unvoiced frame
  std::vector<double> rms;       // per frame, all frames
};

PitchTrack track_pitch(const AudioClip& clip, const PitchConfig& cfg);

}  // namespace dsp
}  // namespace flespeech

#endif  // FLESPEECH_DSP_PITCH_H_
