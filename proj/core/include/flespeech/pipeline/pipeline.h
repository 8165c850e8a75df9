// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#ifndef FLESPEECH_PIPELINE_PIPELINE_H_
#define FLESPEECH_PIPELINE_PIPELINE_H_

#include <cstdint>
#include <map>
#include <string>

#include "flespeech/mpe/prompt_bundle.h"
#include "flespeech/train/stages.h"

namespace flespeech {
namespace pipeline {

// The full inference stack is the model set a finished checkpoint holds.
using ModelSet = train::TrainModels;

ModelSet load_model_set(const std::string& dir);

// Offline prompt encoders wired with the model set's synonym table so
// style-caption paraphrases share embeddings.
struct OfflineEncoders {
  clients::OfflineTextEncoder text;
  clients::OfflineVisionEncoder vision;

  explicit OfflineEncoders(const ModelSet& models);
  mpe::PromptClients clients() { return {&text, &vision}; }
};

struct SynthesisRequest {
  std::string text;
  mpe::PromptBundle stage1_prompts;
  mpe::PromptBundle stage2_prompts;
  std::uint64_t seed = 0;
  lm::SamplingConfig sampling;  // its seed field is derived from `seed`
};

// Everything required to reproduce one output bit-exactly.
struct ProvenanceRecord {
  std::string text;
  std::uint64_t seed = 0;
  std::uint64_t lm_condition_seed = 0;
  std::uint64_t lm_sampling_seed = 0;
  std::uint64_t acoustic_condition_seed = 0;
  std::uint64_t flow_noise_seed = 0;
  std::uint64_t stage1_bundle_hash = 0;
  std::uint64_t stage2_bundle_hash = 0;
  std::map<std::string, std::string> model_hashes;  // component -> hex
  int max_tokens = 0;
  int min_tokens = 0;
  double temperature = 0.0;
  int top_k = 0;
  int ode_steps = 0;
  double cfg_scale = 1.0;
  int generated_tokens = 0;
  bool truncated = false;
};

std::string provenance_to_json(const ProvenanceRecord& p);
void write_provenance(const std::string& path, const ProvenanceRecord& p);

struct SynthesisResult {
  AudioClip audio;
  tokenizer::SemanticTokenSequence tokens;
  ConditionEmbedding lm_condition;
  ConditionEmbedding acoustic_condition;
  ProvenanceRecord provenance;
};

// text_to_phonemes -> sample_condition(lm) -> lm_generate ->
// sample_condition(acoustic) -> ode_sample -> decode_audio. Component
// errors surface as PartialFailure naming the failing stage. Deterministic
// given (request, models).
SynthesisResult synthesize(const SynthesisRequest& request,
                           const ModelSet& models,
                           const mpe::PromptClients& clients);

// Writes 16 kHz mono PCM WAV plus the provenance sidecar at path + ".json".
void write_synthesis_output(const std::string& wav_path,
                            const SynthesisResult& result);

// Re-synthesizes `source` with its own transcript, a style caption as the
// stage-1 prompt, and the source itself as the stage-2 audio prompt.
SynthesisResult edit_style(const AudioClip& source,
                           const std::string& style_caption,
                           const ModelSet& models,
                           const mpe::PromptClients& clients,
                           clients::AsrClient& asr, std::uint64_t seed,
                           const lm::SamplingConfig& sampling = {});

// Keeps the source as the stage-1 (style) prompt and replaces the stage-2
// prompt with an edited face caption to move the timbre.
SynthesisResult convert_voice_by_caption(const AudioClip& source,
                                         const std::string& face_caption,
                                         const ModelSet& models,
                                         const mpe::PromptClients& clients,
                                         clients::AsrClient& asr,
                                         std::uint64_t seed,
                                         const lm::SamplingConfig& sampling = {});

}  // namespace pipeline
}  // namespace flespeech

#endif  // FLESPEECH_PIPELINE_PIPELINE_H_
