// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#include "flespeech/data/attributes.h"

#include <cctype>

#include "flespeech/common/error.h"

namespace flespeech {
namespace data {

int count_words(const std::string& transcript) {
  int words = 0;
  bool in_word = false;
  for (char c : transcript) {
    bool space = std::isspace((unsigned char)c) != 0;
    if (!space && !in_word) ++words;
    in_word = !space;
  }
  return words;
}

AttributeRecord extract_attributes(const AudioClip& audio,
                                   const std::string& transcript,
                                   const dsp::PitchConfig& pitch_cfg) {
  if (audio.empty()) throw EmptyAudioError("cannot extract attributes");

  dsp::PitchTrack track = dsp::track_pitch(audio, pitch_cfg);

  double pitch_sum = 0.0, pitch_sq = 0.0;
  int voiced = 0;
  double rms_sum = 0.0;
  const int frames = (int)track.pitch_hz.size();
  for (int i = 0; i < frames; ++i) {
    rms_sum += track.rms[(size_t)i];
    if (track.pitch_hz[(size_t)i] > 0.0) {
      pitch_sum += track.pitch_hz[(size_t)i];
      pitch_sq += track.pitch_hz[(size_t)i] * track.pitch_hz[(size_t)i];
      ++voiced;
    }
  }
  if (voiced == 0) {
    throw NoVoicedFramesError("every frame is unvoiced");
  }

  AttributeRecord rec;
  rec.pitch_mean_hz = pitch_sum / voiced;
  rec.pitch_variance = pitch_sq / voiced - rec.pitch_mean_hz * rec.pitch_mean_hz;
  if (rec.pitch_variance < 0.0) rec.pitch_variance = 0.0;  // rounding guard
  rec.rms_mean = frames > 0 ? rms_sum / frames : 0.0;
  rec.speech_rate = count_words(transcript) / audio.duration_s();
  return rec;
}

}  // namespace data
}  // namespace flespeech
