// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#ifndef FLESPEECH_TRAIN_CONFIG_H_
#define FLESPEECH_TRAIN_CONFIG_H_

#include <cstdint>
#include <string>
#include <vector>

#include "flespeech/train/stages.h"

namespace flespeech {
namespace train {

// Key/value run configuration ("key = value" lines, '#' comments,
// `manifest` repeatable). Model presets: "desk" (library defaults) or
// "reference" (published sizes); individual dimensions can be overridden.
struct TrainRunConfig {
  std::string run_dir = "runs/default";
  std::vector<std::string> manifests;

  // Inputs prepared before stage 1.
  std::string codebook_path;
  std::string lexicon_path;
  std::string synonyms_path;
  std::string codec_dir;

  long long steps = 100;
  std::uint64_t seed = 0;
  long long total_schedule_steps = 10000;
  LRSchedule lr;
  double generation_loss_weight = 1.0;
  double modality_keep_prob = 0.5;

  std::string preset = "desk";
  lm::LMConfig lm;    // phoneme_count/k_tokens filled from assets at build
  fm::FMConfig fm;
  mpe::MPEConfig mpe;
};

TrainRunConfig parse_train_config(const std::string& path);

HarnessConfig harness_config(const TrainRunConfig& cfg);

// Fresh stage-1 models: codebook, lexicon, and codec loaded from the
// configured paths; LM, flow, and prompt encoders initialized from the
// configured dimensions and seed.
TrainModels make_fresh_models(const TrainRunConfig& cfg);

}  // namespace train
}  // namespace flespeech

#endif  // FLESPEECH_TRAIN_CONFIG_H_
