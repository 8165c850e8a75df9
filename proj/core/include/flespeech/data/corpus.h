// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#ifndef FLESPEECH_DATA_CORPUS_H_
#define FLESPEECH_DATA_CORPUS_H_

#include <cstdint>
#include <string>

#include "flespeech/clients/clients.h"
#include "flespeech/data/captions.h"
#include "flespeech/data/gate.h"
#include "flespeech/data/manifest.h"

namespace flespeech {
namespace data {

// Corpus directory layout: one <stem>.wav per utterance, a <stem>.txt
// transcript beside it, and optionally <stem>.face.ppm plus <stem>.meta.json
// ({"gender", "emotion", "face_static_caption", "face_dynamic_caption"}).
struct BuildConfig {
  std::string input_dir;
  std::string output_manifest;
  std::string synonyms_path;
  std::uint64_t seed = 0;
};

struct BuildClients {
  clients::ScoreClient* snr = nullptr;     // defaults to the offline scorer
  clients::ScoreClient* dnsmos = nullptr;  // defaults to the offline scorer
  clients::LlmClient* combiner = nullptr;  // defaults to the template join
};

struct BuildReport {
  int total = 0;
  int accepted = 0;
  int rejected = 0;
  int labeled = 0;
};

// Scores, gates, extracts attributes, computes corpus bounds, labels, and
// renders style captions, then writes the JSON-Lines manifest. Labels are
// only assigned when at least two clips survive the gate (interval bounds
// need two values). Throws EmptyInput when the directory has no wav files.
BuildReport build_corpus_manifest(const BuildConfig& cfg,
                                  const BuildClients& clients = {});

}  // namespace data
}  // namespace flespeech

#endif  // FLESPEECH_DATA_CORPUS_H_
