// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#ifndef FLESPEECH_TRAIN_STAGES_H_
#define FLESPEECH_TRAIN_STAGES_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "flespeech/codec/codec.h"
#include "flespeech/fm/fm.h"
#include "flespeech/lm/lexicon.h"
#include "flespeech/lm/lm.h"
#include "flespeech/mpe/mpe.h"
#include "flespeech/tokenizer/tokenizer.h"
#include "flespeech/train/schedule.h"

namespace flespeech {
namespace train {

enum class TrainStage { joint_pretrain, expressive_finetune, mpe_train };

TrainStage stage_from_number(int n);
int stage_number(TrainStage s);
std::string train_stage_name(TrainStage s);

struct StagePlan {
  TrainStage stage = TrainStage::joint_pretrain;
  std::vector<std::string> manifests;
  std::vector<std::string> frozen_components;
  std::vector<std::string> loss_terms;
};

// Canonical plan: stages 1 and 2 train the generators (LM + flow) plus the
// per-stage reference encoders against a frozen codec; stage 3 freezes the
// whole generation backbone and trains the prompt encoder and prior with
// diffusion + generation loss.
StagePlan plan_for_stage(int stage_number,
                         const std::vector<std::string>& manifests);

// Everything a run needs in one place. Checkpoints written by the harness
// contain all of it, so any checkpoint directory doubles as a model set for
// inference.
struct TrainModels {
  tokenizer::KMeansCodebook codebook;
  lm::Lexicon lexicon;
  std::string lexicon_path;   // source JSON, copied into checkpoints
  std::string synonyms_path;  // source JSON, copied into checkpoints
  codec::CodecModel codec;
  lm::LMModel lm;
  fm::FMModel fm;
  mpe::MPEModel mpe_lm;
  mpe::MPEModel mpe_ac;
};

void save_models(const TrainModels& models, const std::string& dir);
TrainModels load_models(const std::string& dir);

struct HarnessConfig {
  std::string run_dir = "runs/default";
  // Absolute end step for this invocation; resuming continues toward it.
  long long steps = 100;
  std::uint64_t seed = 0;
  LRSchedule lr;
  long long total_schedule_steps = 10000;
  // Stage-3 weight on the generation loss added to the diffusion MSE.
  double generation_loss_weight = 1.0;
  // Stage-3 random prompt masking: probability of keeping each available
  // modality in a training bundle.
  double modality_keep_prob = 0.5;
};

struct StageReport {
  int stage_number = 1;
  long long start_step = 0;
  long long end_step = 0;
  // Loss terms at the first and last executed step: {"lm","fm"} for stages
  // 1-2, {"diffusion","generation"} for stage 3.
  std::map<std::string, double> first_terms;
  std::map<std::string, double> last_terms;
  std::map<std::string, std::uint64_t> frozen_hashes_before;
  std::map<std::string, std::uint64_t> frozen_hashes_after;
  std::string checkpoint_dir;
};

// Runs one stage to cfg.steps, resuming from this stage's latest checkpoint
// when one exists, otherwise bootstrapping from the previous stage's latest
// (MissingCheckpoint when absent; stage 1 starts from `models` as given).
// Frozen components are verified by content hash; a mutation is a logic
// error. The finished state is committed as {run}/{stage}/{steps}/.
StageReport run_stage(const StagePlan& plan, TrainModels& models,
                      const HarnessConfig& cfg);

}  // namespace train
}  // namespace flespeech

#endif  // FLESPEECH_TRAIN_STAGES_H_
