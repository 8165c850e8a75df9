// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#ifndef FLESPEECH_AUDIO_AUDIO_CLIP_H_
#define FLESPEECH_AUDIO_AUDIO_CLIP_H_

#include <cstddef>
#include <vector>

namespace flespeech {

// Mono audio, samples in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = 16000;

  std::size_t num_samples() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double duration_s() const {
    return sample_rate > 0
               ? static_cast<double>(samples.size()) / sample_rate
               : 0.0;
  }
};

}  // namespace flespeech

#endif  // FLESPEECH_AUDIO_AUDIO_CLIP_H_
