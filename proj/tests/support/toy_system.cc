// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#include "toy_system.h"

#include <filesystem>

#include "flespeech/audio/wav.h"
#include "flespeech/codec/codec.h"
#include "flespeech/common/rng.h"
#include "flespeech/data/corpus.h"
#include "flespeech/data/manifest.h"
#include "flespeech/nn/optim.h"
#include "flespeech/tokenizer/tokenizer.h"

#ifndef FLESPEECH_ASSETS_DIR
#error "FLESPEECH_ASSETS_DIR must be defined by the build"
#endif

namespace flespeech {
namespace testing {

std::string assets_dir() { return FLESPEECH_ASSETS_DIR; }

train::TrainRunConfig toy_run_config(const std::string& work_dir,
                                     const ToySystem& sys,
                                     const ToySystemOptions& opt) {
  train::TrainRunConfig cfg;
  cfg.run_dir = (std::filesystem::path(work_dir) / "run").string();
  cfg.manifests = {sys.manifest_path};
  cfg.codebook_path = sys.codebook_path;
  cfg.lexicon_path = sys.lexicon_path;
  cfg.synonyms_path = sys.synonyms_path;
  cfg.codec_dir = sys.codec_dir;
  cfg.seed = opt.seed;
  cfg.total_schedule_steps = opt.total_schedule_steps;
  cfg.lr.warmup_steps = opt.warmup_steps;
  cfg.lr.peak = opt.lr_peak;
  cfg.modality_keep_prob = opt.modality_keep_prob;

  cfg.lm.layers = opt.lm_layers;
  cfg.lm.heads = opt.lm_heads;
  cfg.lm.hidden = opt.lm_hidden;
  cfg.lm.ffn = opt.lm_ffn;
  cfg.lm.d_cond = opt.d_cond;

  cfg.fm.layers = opt.fm_layers;
  cfg.fm.heads = opt.fm_heads;
  cfg.fm.hidden = opt.fm_hidden;
  cfg.fm.ffn = opt.fm_ffn;
  cfg.fm.d_cond = opt.d_cond;
  cfg.fm.ode_steps = opt.ode_steps;

  cfg.mpe.d_cond = opt.d_cond;
  cfg.mpe.prompt_seconds = opt.prompt_seconds;
  cfg.mpe.ref_blocks = opt.ref_blocks;
  cfg.mpe.ref_heads = 2;
  cfg.mpe.ref_ffn = 32;
  cfg.mpe.num_queries = opt.num_queries;
  cfg.mpe.q_hidden = opt.q_hidden;
  cfg.mpe.q_layers = opt.q_layers;
  cfg.mpe.q_heads = 2;
  cfg.mpe.q_ffn = 32;
  cfg.mpe.prior_blocks = opt.prior_blocks;
  cfg.mpe.prior_heads = 2;
  cfg.mpe.prior_ffn = 32;
  cfg.mpe.diffusion_steps = opt.diffusion_steps;
  return cfg;
}

ToySystem train_toy_system(const std::string& work_dir,
                           const ToySystemOptions& opt) {
  namespace fs = std::filesystem;
  ToySystem sys;
  sys.work_dir = work_dir;
  fs::create_directories(work_dir);

  ToyCorpusOptions corpus_opt = opt.corpus;
  corpus_opt.seed = Rng::mix(opt.seed, 1);
  sys.corpus =
      write_toy_corpus((fs::path(work_dir) / "corpus").string(), corpus_opt);

  sys.lexicon_path = assets_dir() + "/lexicon_en_toy.json";
  sys.synonyms_path = assets_dir() + "/style_synonyms.json";
  sys.manifest_path = (fs::path(work_dir) / "manifest.jsonl").string();

  data::BuildConfig build_cfg;
  build_cfg.input_dir = sys.corpus.dir;
  build_cfg.output_manifest = sys.manifest_path;
  build_cfg.synonyms_path = sys.synonyms_path;
  build_cfg.seed = Rng::mix(opt.seed, 2);
  data::build_corpus_manifest(build_cfg, data::BuildClients{});

  const auto entries = data::read_manifest(sys.manifest_path);
  std::vector<tokenizer::FeatureFrameSequence> features;
  std::vector<AudioClip> clips;
  for (const auto& e : entries) {
    if (!e.accepted) continue;
    clips.push_back(read_wav(e.audio_path));
    features.push_back(
        tokenizer::extract_features(clips.back(), dsp::FeatureConfig{}));
  }

  sys.codebook_path = (fs::path(work_dir) / "codebook.bin").string();
  tokenizer::save_codebook(
      sys.codebook_path,
      tokenizer::fit_codebook(features, opt.codebook_k, Rng::mix(opt.seed, 3)));

  sys.codec_dir = (fs::path(work_dir) / "codec").string();
  {
    codec::CodecConfig ccfg;
    ccfg.d_lat = 8;
    ccfg.hidden = 32;
    auto codec = codec::CodecModel::init(ccfg, Rng::mix(opt.seed, 4));
    nn::AdamW codec_opt;
    for (long long step = 0; step < opt.codec_steps; ++step) {
      std::vector<AudioClip> batch = {
          clips[(std::size_t)(step % (long long)clips.size())]};
      codec::codec_train_step(batch, codec, codec_opt, 1e-3,
                              Rng::mix(opt.seed, 100 + (std::uint64_t)step));
    }
    codec::save_codec(sys.codec_dir, codec);
  }

  const train::TrainRunConfig cfg = toy_run_config(work_dir, sys, opt);
  sys.run_dir = cfg.run_dir;
  train::TrainModels models = train::make_fresh_models(cfg);

  train::HarnessConfig hc = train::harness_config(cfg);
  hc.steps = opt.stage1_steps;
  train::run_stage(train::plan_for_stage(1, cfg.manifests), models, hc);
  hc.steps = opt.stage2_steps;
  train::run_stage(train::plan_for_stage(2, cfg.manifests), models, hc);
  hc.steps = opt.stage3_steps;
  const train::StageReport report =
      train::run_stage(train::plan_for_stage(3, cfg.manifests), models, hc);

  sys.model_dir = report.checkpoint_dir;
  sys.models = train::load_models(sys.model_dir);
  return sys;
}

}  // namespace testing
}  // namespace flespeech
