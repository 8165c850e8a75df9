// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#ifndef FLESPEECH_DATA_ATTRIBUTES_H_
#define FLESPEECH_DATA_ATTRIBUTES_H_

#include <optional>
#include <string>

#include "flespeech/audio/audio_clip.h"
#include "flespeech/dsp/pitch.h"

namespace flespeech {
namespace data {

// Acoustic style attributes of one utterance. Pitch statistics cover voiced
// frames only; rms_mean covers every frame; speech_rate is words per second.
struct AttributeRecord {
  double pitch_mean_hz = 0.0;
  double pitch_variance = 0.0;
  double rms_mean = 0.0;
  double speech_rate = 0.0;
  std::optional<std::string> gender;   // carried from input metadata
  std::optional<std::string> emotion;  // carried from input metadata
};

// Whitespace-delimited token count; the unit of the quality gate's word
// minimum and of speech_rate.
int count_words(const std::string& transcript);

// Throws EmptyAudio on an empty clip and NoVoicedFrames when every frame
// comes back unvoiced.
AttributeRecord extract_attributes(const AudioClip& audio,
                                   const std::string& transcript,
                                   const dsp::PitchConfig& pitch_cfg = {});

}  // namespace data
}  // namespace flespeech

#endif  // FLESPEECH_DATA_ATTRIBUTES_H_
