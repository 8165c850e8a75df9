// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#include "flespeech/pipeline/pipeline.h"

#include <fstream>

#include "flespeech/audio/wav.h"
#include "flespeech/common/error.h"
#include "flespeech/common/hash.h"
#include "flespeech/common/rng.h"
#include "flespeech/data/captions.h"

#include "json.hpp"

namespace flespeech {
namespace pipeline {

ModelSet load_model_set(const std::string& dir) {
  return train::load_models(dir);
}

OfflineEncoders::OfflineEncoders(const ModelSet& models)
    : text(models.mpe_lm.cfg.d_modality),
      vision(models.mpe_lm.cfg.d_modality) {
  if (!models.synonyms_path.empty()) {
    data::register_synonyms_with_encoder(
        data::SynonymTable::load(models.synonyms_path), text);
  }
}

namespace {

template <typename Fn>
auto run_step(const std::string& stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const PartialFailureError&) {
    throw;  // already attributed to an inner stage
  } catch (const std::exception& e) {
    throw PartialFailureError(stage, e.what());
  }
}

std::uint64_t codebook_hash(const tokenizer::KMeansCodebook& cb) {
  const auto& v = cb.centroids.vec();
  return fnv1a64(v.data(), v.size() * sizeof(double));
}

std::map<std::string, std::string> model_hashes(const ModelSet& models) {
  return {
      {"codebook", hash_hex(codebook_hash(models.codebook))},
      {"codec", hash_hex(models.codec.params.content_hash())},
      {"lm", hash_hex(models.lm.params.content_hash())},
      {"fm", hash_hex(models.fm.params.content_hash())},
      {"mpe_lm", hash_hex(models.mpe_lm.params.content_hash())},
      {"mpe_ac", hash_hex(models.mpe_ac.params.content_hash())},
  };
}

}  // namespace

SynthesisResult synthesize(const SynthesisRequest& request,
                           const ModelSet& models,
                           const mpe::PromptClients& clients) {
  if (request.text.empty()) {
    throw EmptyTextError("synthesis needs input text");
  }

  SynthesisResult result;
  ProvenanceRecord& prov = result.provenance;
  prov.text = request.text;
  prov.seed = request.seed;
  prov.lm_condition_seed = Rng::mix(request.seed, 1);
  prov.lm_sampling_seed = Rng::mix(request.seed, 2);
  prov.acoustic_condition_seed = Rng::mix(request.seed, 3);
  prov.flow_noise_seed = Rng::mix(request.seed, 4);
  prov.stage1_bundle_hash = mpe::bundle_hash(request.stage1_prompts);
  prov.stage2_bundle_hash = mpe::bundle_hash(request.stage2_prompts);
  prov.model_hashes = model_hashes(models);
  prov.max_tokens = request.sampling.max_tokens;
  prov.min_tokens = request.sampling.min_tokens;
  prov.temperature = request.sampling.temperature;
  prov.top_k = request.sampling.top_k;
  prov.ode_steps = models.fm.cfg.ode_steps;
  prov.cfg_scale = models.fm.cfg.cfg_scale;

  lm::PhonemeSequence phonemes = run_step("phonemes", [&] {
    return lm::text_to_phonemes(request.text, models.lexicon);
  });

  result.lm_condition = run_step("lm_condition", [&] {
    return mpe::sample_condition(request.stage1_prompts, clients,
                                 &models.mpe_lm, Stage::lm,
                                 prov.lm_condition_seed);
  });

  lm::SamplingConfig sampling = request.sampling;
  sampling.seed = prov.lm_sampling_seed;
  lm::GenerationResult gen = run_step("lm_generate", [&] {
    return lm::lm_generate(phonemes, result.lm_condition, models.lm, sampling);
  });
  result.tokens = gen.tokens;
  prov.generated_tokens = (int)gen.tokens.tokens.size();
  prov.truncated = gen.truncated;

  result.acoustic_condition = run_step("acoustic_condition", [&] {
    return mpe::sample_condition(request.stage2_prompts, clients,
                                 &models.mpe_ac, Stage::acoustic,
                                 prov.acoustic_condition_seed);
  });

  codec::AcousticLatentSequence latents = run_step("ode_sample", [&] {
    return fm::ode_sample(result.tokens, result.acoustic_condition, models.fm,
                          prov.flow_noise_seed);
  });

  result.audio = run_step("decode", [&] {
    return codec::decode_audio(latents, models.codec);
  });
  return result;
}

std::string provenance_to_json(const ProvenanceRecord& p) {
  nlohmann::json j;
  j["text"] = p.text;
  j["seed"] = p.seed;
  j["seeds"]["lm_condition"] = p.lm_condition_seed;
  j["seeds"]["lm_sampling"] = p.lm_sampling_seed;
  j["seeds"]["acoustic_condition"] = p.acoustic_condition_seed;
  j["seeds"]["flow_noise"] = p.flow_noise_seed;
  j["prompt_hashes"]["stage1"] = hash_hex(p.stage1_bundle_hash);
  j["prompt_hashes"]["stage2"] = hash_hex(p.stage2_bundle_hash);
  for (const auto& [name, hex] : p.model_hashes) {
    j["model_hashes"][name] = hex;
  }
  j["sampling"]["max_tokens"] = p.max_tokens;
  j["sampling"]["min_tokens"] = p.min_tokens;
  j["sampling"]["temperature"] = p.temperature;
  j["sampling"]["top_k"] = p.top_k;
  j["sampling"]["ode_steps"] = p.ode_steps;
  j["sampling"]["cfg_scale"] = p.cfg_scale;
  j["generated_tokens"] = p.generated_tokens;
  j["truncated"] = p.truncated;
  return j.dump(2);
}

void write_provenance(const std::string& path, const ProvenanceRecord& p) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp);
    if (!f) throw IoError("cannot write provenance " + tmp);
    f << provenance_to_json(p) << "\n";
  }
  std::filesystem::rename(tmp, path);
}

void write_synthesis_output(const std::string& wav_path,
                            const SynthesisResult& result) {
  write_wav(wav_path, result.audio);
  write_provenance(wav_path + ".json", result.provenance);
}

SynthesisResult edit_style(const AudioClip& source,
                           const std::string& style_caption,
                           const ModelSet& models,
                           const mpe::PromptClients& clients,
                           clients::AsrClient& asr, std::uint64_t seed,
                           const lm::SamplingConfig& sampling) {
  if (style_caption.empty()) {
    throw EmptyCaptionError("style editing needs a caption");
  }
  SynthesisRequest request;
  request.text = asr.transcribe(source);
  request.stage1_prompts.set_text(style_caption);
  request.stage2_prompts.set_audio(source);
  request.seed = seed;
  request.sampling = sampling;
  return synthesize(request, models, clients);
}

SynthesisResult convert_voice_by_caption(const AudioClip& source,
                                         const std::string& face_caption,
                                         const ModelSet& models,
                                         const mpe::PromptClients& clients,
                                         clients::AsrClient& asr,
                                         std::uint64_t seed,
                                         const lm::SamplingConfig& sampling) {
  if (face_caption.empty()) {
    throw EmptyCaptionError("voice conversion needs a face caption");
  }
  SynthesisRequest request;
  request.text = asr.transcribe(source);
  request.stage1_prompts.set_audio(source);
  request.stage2_prompts.set_face_caption(face_caption);
  request.seed = seed;
  request.sampling = sampling;
  return synthesize(request, models, clients);
}

}  // namespace pipeline
}  // namespace flespeech
