// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#ifndef FLESPEECH_STAGE_H_
#define FLESPEECH_STAGE_H_

#include <string>

#include "flespeech/common/error.h"
#include "flespeech/nn/tensor.h"

namespace flespeech {

// Which generation stage a condition embedding belongs to. The two stages
// use separately trained prompt encoders and must not be mixed.
enum class Stage {
  lm,        // semantic token prediction
  acoustic,  // latent generation
};

inline std::string stage_name(Stage s) {
  return s == Stage::lm ? "lm_stage" : "acoustic_stage";
}

inline Stage stage_from_name(const std::string& name) {
  if (name == "lm_stage") return Stage::lm;
  if (name == "acoustic_stage") return Stage::acoustic;
  throw StageMismatchError("unknown stage name: " + name);
}

// Global conditioning vector for one stage, shape [1, D_cond].
struct ConditionEmbedding {
  nn::Tensor vector;
  Stage source_stage = Stage::lm;
};

}  // namespace flespeech

#endif  // FLESPEECH_STAGE_H_
