// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#ifndef FLESPEECH_TESTS_SUPPORT_TOY_CORPUS_H_
#define FLESPEECH_TESTS_SUPPORT_TOY_CORPUS_H_

#include <cstdint>
#include <string>
#include <vector>

namespace flespeech {
namespace testing {

struct ToyCorpusOptions {
  int speakers = 3;
  // Per speaker, alternating fast/slow delivery with per-clip jitter so the
  // corpus bounds split the rate labels into all three categories.
  int clips_per_speaker = 4;
  std::uint64_t seed = 0;
  bool with_faces = true;
  bool with_meta = true;
};

struct ToyCorpus {
  std::string dir;
  std::vector<std::string> stems;  // absolute, without extension
  std::vector<std::string> transcripts;
  std::vector<bool> fast;  // delivery class per clip
};

// Writes <stem>.wav/.txt plus optional .face.ppm/.meta.json fixtures.
// Clips are enveloped sine bursts with silent gaps: tonal enough for the
// quality heuristics, one burst per transcript word.
ToyCorpus write_toy_corpus(const std::string& dir,
                           const ToyCorpusOptions& opt = {});

}  // namespace testing
}  // namespace flespeech

#endif  // FLESPEECH_TESTS_SUPPORT_TOY_CORPUS_H_
