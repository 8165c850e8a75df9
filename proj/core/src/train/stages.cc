// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#include "flespeech/train/stages.h"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "flespeech/audio/wav.h"
#include "flespeech/common/error.h"
#include "flespeech/common/rng.h"
#include "flespeech/data/captions.h"
#include "flespeech/data/manifest.h"
#include "flespeech/media/image.h"
#include "flespeech/train/checkpoint.h"

#include "json.hpp"

namespace flespeech {
namespace train {

namespace fs = std::filesystem;

TrainStage stage_from_number(int n) {
  switch (n) {
    case 1:
      return TrainStage::joint_pretrain;
    case 2:
      return TrainStage::expressive_finetune;
    case 3:
      return TrainStage::mpe_train;
    default:
      throw StageMismatchError("training stage must be 1, 2, or 3");
  }
}

int stage_number(TrainStage s) {
  switch (s) {
    case TrainStage::joint_pretrain:
      return 1;
    case TrainStage::expressive_finetune:
      return 2;
    case TrainStage::mpe_train:
      return 3;
  }
  return 1;
}

std::string train_stage_name(TrainStage s) {
  switch (s) {
    case TrainStage::joint_pretrain:
      return "joint_pretrain";
    case TrainStage::expressive_finetune:
      return "expressive_finetune";
    case TrainStage::mpe_train:
      return "mpe_train";
  }
  return "joint_pretrain";
}

StagePlan plan_for_stage(int n, const std::vector<std::string>& manifests) {
  StagePlan plan;
  plan.stage = stage_from_number(n);
  plan.manifests = manifests;
  if (n < 3) {
    plan.frozen_components = {"codec"};
    plan.loss_terms = {"lm", "fm"};
  } else {
    plan.frozen_components = {"codec", "lm", "fm", "mpe_lm.ref", "mpe_ac.ref"};
    plan.loss_terms = {"diffusion", "generation"};
  }
  return plan;
}

void save_models(const TrainModels& models, const std::string& dir) {
  fs::create_directories(dir);
  tokenizer::save_codebook(dir + "/codebook.bin", models.codebook);
  if (!models.lexicon_path.empty()) {
    fs::copy_file(models.lexicon_path, dir + "/lexicon.json",
                  fs::copy_options::overwrite_existing);
  }
  if (!models.synonyms_path.empty()) {
    fs::copy_file(models.synonyms_path, dir + "/synonyms.json",
                  fs::copy_options::overwrite_existing);
  }
  codec::save_codec(dir + "/codec", models.codec);
  lm::save_lm(dir + "/lm", models.lm);
  fm::save_fm(dir + "/fm", models.fm);
  mpe::save_mpe(models.mpe_lm, dir + "/mpe_lm");
  mpe::save_mpe(models.mpe_ac, dir + "/mpe_ac");
}

TrainModels load_models(const std::string& dir) {
  TrainModels m;
  m.codebook = tokenizer::load_codebook(dir + "/codebook.bin");
  m.lexicon_path = dir + "/lexicon.json";
  m.lexicon = lm::Lexicon::load(m.lexicon_path);
  if (fs::exists(dir + "/synonyms.json")) {
    m.synonyms_path = dir + "/synonyms.json";
  }
  m.codec = codec::load_codec(dir + "/codec");
  m.lm = lm::load_lm(dir + "/lm");
  m.fm = fm::load_fm(dir + "/fm");
  m.mpe_lm = mpe::load_mpe(dir + "/mpe_lm");
  m.mpe_ac = mpe::load_mpe(dir + "/mpe_ac");
  return m;
}

namespace {

using nn::Var;

std::vector<data::ManifestEntry> load_training_entries(
    const std::vector<std::string>& manifests) {
  std::vector<data::ManifestEntry> out;
  for (const auto& path : manifests) {
    for (auto& e : data::read_manifest(path)) {
      if (e.accepted) out.push_back(std::move(e));
    }
  }
  if (out.empty()) {
    throw EmptyManifestError("no accepted entries in the training manifests");
  }
  return out;
}

std::map<std::string, std::uint64_t> frozen_hashes(const StagePlan& plan,
                                                   const TrainModels& m) {
  std::map<std::string, std::uint64_t> h;
  for (const auto& comp : plan.frozen_components) {
    if (comp == "codec") {
      h[comp] = m.codec.params.content_hash();
    } else if (comp == "lm") {
      h[comp] = m.lm.params.content_hash();
    } else if (comp == "fm") {
      h[comp] = m.fm.params.content_hash();
    } else if (comp == "mpe_lm.ref") {
      h[comp] = m.mpe_lm.params.content_hash_prefix("ref.");
    } else if (comp == "mpe_ac.ref") {
      h[comp] = m.mpe_ac.params.content_hash_prefix("ref.");
    } else {
      throw StageMismatchError("unknown frozen component " + comp);
    }
  }
  return h;
}

struct StepInputs {
  AudioClip audio;
  lm::PhonemeSequence phonemes;
  tokenizer::SemanticTokenSequence tokens;
  codec::AcousticLatentSequence latents;
};

StepInputs prepare_inputs(const TrainModels& models,
                          const data::ManifestEntry& entry) {
  StepInputs in;
  in.audio = read_wav(entry.audio_path);
  dsp::FeatureConfig feat_cfg;
  in.phonemes = lm::text_to_phonemes(entry.transcript, models.lexicon);
  in.tokens =
      tokenizer::tokenize(tokenizer::extract_features(in.audio, feat_cfg),
                          models.codebook);
  in.latents = codec::encode_latent(in.audio, models.codec);
  return in;
}

// Stages 1-2: joint LM + flow objective with trainable per-stage reference
// encoders providing the conditions.
std::map<std::string, double> generator_step(
    TrainModels& models, const data::ManifestEntry& entry, double lr,
    std::uint64_t seed_step, std::map<std::string, nn::AdamW>& opts) {
  StepInputs in = prepare_inputs(models, entry);

  nn::ParamCtx P_ref_lm{&models.mpe_lm.params, false};
  Var cond_lm = mpe::reference_audio_embedding_var(
      mpe::fit_prompt_window(in.audio, models.mpe_lm.cfg), P_ref_lm,
      models.mpe_lm.cfg, models.mpe_lm.feat_cfg, models.mpe_lm.feat_mats);
  Var lm_term = lm::lm_loss_var(in.phonemes, cond_lm, in.tokens,
                                nn::ParamCtx{&models.lm.params, false},
                                models.lm.cfg);

  nn::ParamCtx P_ref_ac{&models.mpe_ac.params, false};
  Var cond_ac = mpe::reference_audio_embedding_var(
      mpe::fit_prompt_window(in.audio, models.mpe_ac.cfg), P_ref_ac,
      models.mpe_ac.cfg, models.mpe_ac.feat_cfg, models.mpe_ac.feat_mats);
  Var fm_term = fm::fm_loss_var(in.tokens, cond_ac, in.latents,
                                nn::ParamCtx{&models.fm.params, false},
                                models.fm.cfg, seed_step, true);

  Var total = nn::add(lm_term, fm_term);

  models.lm.params.zero_grads();
  models.fm.params.zero_grads();
  models.mpe_lm.params.zero_grads();
  models.mpe_ac.params.zero_grads();
  nn::backward(total);

  opts.at("lm").step(models.lm.params, lr);
  opts.at("fm").step(models.fm.params, lr);
  opts.at("mpe_lm").step(models.mpe_lm.params, lr,
                         models.mpe_lm.params.names_with_prefix("ref."));
  opts.at("mpe_ac").step(models.mpe_ac.params, lr,
                         models.mpe_ac.params.names_with_prefix("ref."));

  return {{"lm", lm_term.value().at(0)}, {"fm", fm_term.value().at(0)}};
}

// Seeded random prompt masking so the prior trains against every subset of
// the available modalities.
mpe::PromptBundle training_bundle(const data::ManifestEntry& entry,
                                  const AudioClip& audio, double keep_prob,
                                  std::uint64_t seed) {
  Rng rng(seed);
  mpe::PromptBundle bundle;
  if (!entry.captions.style_caption.empty() && rng.uniform() < keep_prob) {
    bundle.set_text(entry.captions.style_caption);
  }
  if (rng.uniform() < keep_prob) bundle.set_audio(audio);
  if (entry.face_image_path && rng.uniform() < keep_prob) {
    bundle.set_image(read_pnm(*entry.face_image_path));
  }
  if (entry.captions.face_combined_caption && rng.uniform() < keep_prob) {
    bundle.set_face_caption(*entry.captions.face_combined_caption);
  }
  return bundle;
}

// Stage 3: diffusion MSE plus the generation losses of the frozen LM and
// flow models evaluated at the predicted condition.
std::map<std::string, double> mpe_step(
    TrainModels& models, const data::ManifestEntry& entry,
    const mpe::PromptClients& clients, double lr, std::uint64_t seed_step,
    double generation_loss_weight, double keep_prob,
    std::map<std::string, nn::AdamW>& opts) {
  StepInputs in = prepare_inputs(models, entry);
  mpe::PromptBundle bundle =
      training_bundle(entry, in.audio, keep_prob, Rng::mix(seed_step, 1));

  nn::Tensor x0_lm = mpe::encode_reference_audio(in.audio, models.mpe_lm).vector;
  nn::Tensor x0_ac = mpe::encode_reference_audio(in.audio, models.mpe_ac).vector;

  nn::ParamCtx P_lm{&models.mpe_lm.params, false};
  mpe::PriorForward fwd_lm = mpe::prior_forward_var(
      bundle, clients, x0_lm, models.mpe_lm, P_lm, Rng::mix(seed_step, 2));
  nn::ParamCtx P_ac{&models.mpe_ac.params, false};
  mpe::PriorForward fwd_ac = mpe::prior_forward_var(
      bundle, clients, x0_ac, models.mpe_ac, P_ac, Rng::mix(seed_step, 3));

  Var gen_lm = lm::lm_loss_var(in.phonemes, fwd_lm.x0_hat, in.tokens,
                               nn::ParamCtx{&models.lm.params, true},
                               models.lm.cfg);
  // No condition dropout here: the generation loss must always see the
  // predicted condition to pass its gradient back to the prior.
  Var gen_fm = fm::fm_loss_var(in.tokens, fwd_ac.x0_hat, in.latents,
                               nn::ParamCtx{&models.fm.params, true},
                               models.fm.cfg, Rng::mix(seed_step, 4), false);

  Var diffusion = nn::add(fwd_lm.loss, fwd_ac.loss);
  Var generation = nn::add(gen_lm, gen_fm);
  Var total =
      nn::add(diffusion, nn::scale(generation, generation_loss_weight));

  models.mpe_lm.params.zero_grads();
  models.mpe_ac.params.zero_grads();
  nn::backward(total);

  opts.at("mpe_lm").step(models.mpe_lm.params, lr,
                         mpe::prior_trainable_names(models.mpe_lm));
  opts.at("mpe_ac").step(models.mpe_ac.params, lr,
                         mpe::prior_trainable_names(models.mpe_ac));

  return {{"diffusion", diffusion.value().at(0)},
          {"generation", generation.value().at(0)}};
}

std::map<std::string, nn::AdamW> make_optimizers(int stage) {
  std::map<std::string, nn::AdamW> opts;
  nn::AdamWConfig cfg;
  if (stage < 3) {
    opts.emplace("lm", nn::AdamW(cfg));
    opts.emplace("fm", nn::AdamW(cfg));
  }
  opts.emplace("mpe_lm", nn::AdamW(cfg));
  opts.emplace("mpe_ac", nn::AdamW(cfg));
  return opts;
}

void save_optimizers(const std::map<std::string, nn::AdamW>& opts,
                     const std::string& dir) {
  for (const auto& [name, opt] : opts) {
    opt.save(dir + "/opt_" + name + ".fls");
  }
}

void load_optimizers(std::map<std::string, nn::AdamW>& opts,
                     const std::string& dir) {
  for (auto& [name, opt] : opts) {
    opt.load(dir + "/opt_" + name + ".fls");
  }
}

void write_trainer_state(const std::string& dir, int stage, long long step,
                         std::uint64_t seed) {
  nlohmann::json j;
  j["stage"] = stage;
  j["step"] = step;
  j["seed"] = seed;
  std::ofstream f(dir + "/trainer.json");
  f << j.dump(2) << "\n";
}

}  // namespace

StageReport run_stage(const StagePlan& plan, TrainModels& models,
                      const HarnessConfig& cfg) {
  const int sn = stage_number(plan.stage);
  StageReport report;
  report.stage_number = sn;

  std::map<std::string, nn::AdamW> opts = make_optimizers(sn);
  long long start = 0;
  if (has_checkpoint(cfg.run_dir, sn)) {
    const long long step = latest_checkpoint_step(cfg.run_dir, sn);
    const std::string dir = checkpoint_path(cfg.run_dir, sn, step);
    models = load_models(dir);
    load_optimizers(opts, dir);
    start = step;
  } else if (sn > 1) {
    // Throws MissingCheckpoint when the previous stage never ran.
    models = load_models(latest_checkpoint_path(cfg.run_dir, sn - 1));
  }
  report.start_step = start;

  std::vector<data::ManifestEntry> entries =
      load_training_entries(plan.manifests);

  // Offline stand-ins; remote clients are a deployment concern, training
  // always runs against the deterministic encoders.
  clients::OfflineTextEncoder text_enc(models.mpe_lm.cfg.d_modality);
  clients::OfflineVisionEncoder vision_enc(models.mpe_lm.cfg.d_modality);
  if (!models.synonyms_path.empty()) {
    data::register_synonyms_with_encoder(
        data::SynonymTable::load(models.synonyms_path), text_enc);
  }
  mpe::PromptClients prompt_clients{&text_enc, &vision_enc};

  report.frozen_hashes_before = frozen_hashes(plan, models);

  bool first = true;
  for (long long gs = start; gs < cfg.steps; ++gs) {
    const double lr = lr_at(gs, cfg.lr, cfg.total_schedule_steps);
    const std::uint64_t seed_step = Rng::mix(cfg.seed, (std::uint64_t)gs);
    const data::ManifestEntry& entry =
        entries[(size_t)(gs % (long long)entries.size())];
    std::map<std::string, double> terms =
        sn < 3 ? generator_step(models, entry, lr, seed_step, opts)
               : mpe_step(models, entry, prompt_clients, lr, seed_step,
                          cfg.generation_loss_weight, cfg.modality_keep_prob,
                          opts);
    if (first) {
      report.first_terms = terms;
      first = false;
    }
    report.last_terms = terms;
  }
  report.end_step = cfg.steps;

  report.frozen_hashes_after = frozen_hashes(plan, models);
  if (report.frozen_hashes_before != report.frozen_hashes_after) {
    throw std::logic_error("frozen parameters changed during stage " +
                           std::to_string(sn));
  }

  const std::string staged = stage_checkpoint(cfg.run_dir, sn, cfg.steps);
  save_models(models, staged);
  save_optimizers(opts, staged);
  write_trainer_state(staged, sn, cfg.steps, cfg.seed);
  const std::string final_path = checkpoint_path(cfg.run_dir, sn, cfg.steps);
  commit_checkpoint(staged, final_path);
  report.checkpoint_dir = final_path;
  return report;
}

}  // namespace train
}  // namespace flespeech
