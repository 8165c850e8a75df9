// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#ifndef FLESPEECH_AUDIO_WAV_H_
#define FLESPEECH_AUDIO_WAV_H_

#include <string>

#include "flespeech/audio/audio_clip.h"

namespace flespeech {

// Reads a 16-bit PCM mono WAV file. Throws IoError on malformed input.
AudioClip read_wav(const std::string& path);

// Writes a 16-bit PCM mono WAV file. Samples are clamped to [-1, 1] and
// rounded deterministically.
void write_wav(const std::string& path, const AudioClip& clip);

}  // namespace flespeech

#endif  // FLESPEECH_AUDIO_WAV_H_
