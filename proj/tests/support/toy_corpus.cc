// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#include "toy_corpus.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "flespeech/audio/wav.h"
#include "flespeech/common/rng.h"
#include "flespeech/media/image.h"

#include "test_util.h"

namespace flespeech {
namespace testing {

namespace {

const char* kTranscripts[] = {
    "the quick brown fox jumps over the lazy dog",
    "she sells sea shells by the sea shore",
    "a calm voice reads the morning news",
    "bright stars shine over the quiet hills",
    "we walk along the river in the soft rain",
    "good morning and welcome to the show",
    "the cat sat on the warm stone wall",
    "many hands make light work every day",
    "birds sing in the tall green trees",
    "the old clock ticks in the silent room",
    "fresh bread smells good in the small shop",
    "children play games near the blue lake",
};
constexpr int kNumTranscripts = 12;

struct SpeakerProfile {
  double f0;
  const char* gender;
  const char* emotion;  // nullptr: leave unset in metadata
  int r, g, b;
  const char* face_static;
  const char* face_dynamic;
};

const SpeakerProfile kSpeakers[] = {
    {150.0, "male", "neutral", 200, 120, 80, "a square jawed face",
     "a steady gaze"},
    {225.0, "female", "happy", 80, 200, 120, "a round smiling face",
     "lively eyebrows"},
    {330.0, "female", nullptr, 120, 80, 200, "a narrow face with glasses",
     "slow blinking"},
};
constexpr int kNumSpeakers = 3;

int count_words(const std::string& text) {
  std::istringstream in(text);
  std::string w;
  int n = 0;
  while (in >> w) ++n;
  return n;
}

Image make_face(const SpeakerProfile& sp) {
  Image img;
  img.height = 16;
  img.width = 16;
  img.channels = 3;
  img.pixels.resize(16 * 16 * 3);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) {
      const double shade = 0.75 + 0.25 * ((x + y) % 2);
      img.pixels[(std::size_t)(y * 16 + x) * 3 + 0] = sp.r / 255.0 * shade;
      img.pixels[(std::size_t)(y * 16 + x) * 3 + 1] = sp.g / 255.0 * shade;
      img.pixels[(std::size_t)(y * 16 + x) * 3 + 2] = sp.b / 255.0 * shade;
    }
  }
  return img;
}

}  // namespace

ToyCorpus write_toy_corpus(const std::string& dir,
                           const ToyCorpusOptions& opt) {
  std::filesystem::create_directories(dir);
  Rng rng(Rng::mix(opt.seed, 0x7031));
  ToyCorpus corpus;
  corpus.dir = dir;

  int clip_index = 0;
  for (int s = 0; s < opt.speakers; ++s) {
    const SpeakerProfile& sp = kSpeakers[s % kNumSpeakers];
    for (int c = 0; c < opt.clips_per_speaker; ++c, ++clip_index) {
      const bool fast = (c % 2) == 0;
      // Fast: ~0.09 s per word. Slow: ~0.36 s. The jitter keeps per-class
      // variance nonzero so interval bounds split the labels.
      const double burst =
          fast ? rng.uniform(0.055, 0.070) : rng.uniform(0.22, 0.28);
      const double pause =
          fast ? rng.uniform(0.028, 0.035) : rng.uniform(0.11, 0.14);
      const double amp = rng.uniform(0.30, 0.60);
      const double f0 = sp.f0 * rng.uniform(0.98, 1.02);
      const std::string text =
          kTranscripts[clip_index % kNumTranscripts];

      char name[32];
      std::snprintf(name, sizeof(name), "clip%03d", clip_index);
      const std::string stem = (std::filesystem::path(dir) / name).string();

      write_wav(stem + ".wav",
                make_burst_clip(f0, count_words(text), burst, pause, amp));
      {
        std::ofstream f(stem + ".txt");
        f << text << "\n";
      }
      if (opt.with_faces) write_pnm(stem + ".face.ppm", make_face(sp));
      if (opt.with_meta) {
        std::ofstream f(stem + ".meta.json");
        f << "{\"gender\": \"" << sp.gender << "\"";
        if (sp.emotion != nullptr) {
          f << ", \"emotion\": \"" << sp.emotion << "\"";
        }
        f << ", \"face_static_caption\": \"" << sp.face_static << "\""
          << ", \"face_dynamic_caption\": \"" << sp.face_dynamic << "\"}\n";
      }

      corpus.stems.push_back(stem);
      corpus.transcripts.push_back(text);
      corpus.fast.push_back(fast);
    }
  }
  return corpus;
}

}  // namespace testing
}  // namespace flespeech
