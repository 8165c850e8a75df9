// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#ifndef FLESPEECH_TESTS_SUPPORT_TOY_SYSTEM_H_
#define FLESPEECH_TESTS_SUPPORT_TOY_SYSTEM_H_

#include <cstdint>
#include <string>

#include "flespeech/train/config.h"
#include "flespeech/train/stages.h"

#include "toy_corpus.h"

namespace flespeech {
namespace testing {

struct ToySystemOptions {
  std::uint64_t seed = 0;
  ToyCorpusOptions corpus;

  int codebook_k = 24;
  long long codec_steps = 20;
  long long stage1_steps = 40;
  long long stage2_steps = 60;  // each stage counts its own steps from zero
  long long stage3_steps = 40;

  int d_cond = 16;
  double prompt_seconds = 1.5;
  double lr_peak = 3e-3;
  long long warmup_steps = 20;
  long long total_schedule_steps = 4000;
  double modality_keep_prob = 0.5;

  int lm_layers = 1, lm_heads = 2, lm_hidden = 32, lm_ffn = 64;
  int fm_layers = 1, fm_heads = 2, fm_hidden = 32, fm_ffn = 64;
  int ode_steps = 8;
  int ref_blocks = 1, num_queries = 2, q_hidden = 16, q_layers = 1;
  int prior_blocks = 1;
  int diffusion_steps = 20;
};

// A complete trained desk-scale system rooted at work_dir: corpus, labeled
// manifest, codebook, codec, and the three harness stages. model_dir is the
// final stage-3 checkpoint, loadable as a full model set.
struct ToySystem {
  std::string work_dir;
  ToyCorpus corpus;
  std::string manifest_path;
  std::string lexicon_path;
  std::string synonyms_path;
  std::string codebook_path;
  std::string codec_dir;
  std::string run_dir;
  std::string model_dir;
  train::TrainModels models;
};

// Paths into the source tree assets, fixed at compile time.
std::string assets_dir();

// Builds the run config used by train_toy_system; exposed so tests can
// re-run individual stages against the same inputs.
train::TrainRunConfig toy_run_config(const std::string& work_dir,
                                     const ToySystem& sys,
                                     const ToySystemOptions& opt);

ToySystem train_toy_system(const std::string& work_dir,
                           const ToySystemOptions& opt = {});

}  // namespace testing
}  // namespace flespeech

#endif  // FLESPEECH_TESTS_SUPPORT_TOY_SYSTEM_H_
