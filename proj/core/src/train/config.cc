// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#include "flespeech/train/config.h"

#include <fstream>
#include <stdexcept>

#include "flespeech/common/error.h"
#include "flespeech/common/hash.h"
#include "flespeech/common/rng.h"

namespace flespeech {
namespace train {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void apply_preset(TrainRunConfig& cfg) {
  if (cfg.preset == "desk") {
    return;  // struct defaults are the desk preset
  }
  if (cfg.preset == "reference") {
    cfg.lm = lm::lm_reference_config();
    cfg.fm = fm::fm_reference_config();
    cfg.mpe = mpe::mpe_reference_config();
    return;
  }
  throw std::invalid_argument("unknown preset " + cfg.preset);
}

}  // namespace

TrainRunConfig parse_train_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open training config " + path);

  TrainRunConfig cfg;
  bool preset_seen = false;
  std::vector<std::pair<std::string, std::string>> pairs;
  std::string line;
  while (std::getline(f, line)) {
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line without '=': " + line);
    }
    pairs.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }

  // Preset applies first so explicit dimension keys can override it.
  for (const auto& [key, value] : pairs) {
    if (key == "preset") {
      cfg.preset = value;
      preset_seen = true;
    }
  }
  if (preset_seen) apply_preset(cfg);

  for (const auto& [key, value] : pairs) {
    if (key == "preset") continue;
    if (key == "run_dir") cfg.run_dir = value;
    else if (key == "manifest") cfg.manifests.push_back(value);
    else if (key == "codebook") cfg.codebook_path = value;
    else if (key == "lexicon") cfg.lexicon_path = value;
    else if (key == "synonyms") cfg.synonyms_path = value;
    else if (key == "codec_dir") cfg.codec_dir = value;
    else if (key == "steps") cfg.steps = std::stoll(value);
    else if (key == "seed") cfg.seed = (std::uint64_t)std::stoull(value);
    else if (key == "total_schedule_steps")
      cfg.total_schedule_steps = std::stoll(value);
    else if (key == "warmup_steps") cfg.lr.warmup_steps = std::stoi(value);
    else if (key == "lr_initial") cfg.lr.initial = std::stod(value);
    else if (key == "lr_peak") cfg.lr.peak = std::stod(value);
    else if (key == "generation_loss_weight")
      cfg.generation_loss_weight = std::stod(value);
    else if (key == "modality_keep_prob")
      cfg.modality_keep_prob = std::stod(value);
    else if (key == "lm.layers") cfg.lm.layers = std::stoi(value);
    else if (key == "lm.heads") cfg.lm.heads = std::stoi(value);
    else if (key == "lm.hidden") cfg.lm.hidden = std::stoi(value);
    else if (key == "lm.ffn") cfg.lm.ffn = std::stoi(value);
    else if (key == "lm.token_rate_hz") cfg.lm.token_rate_hz = std::stod(value);
    else if (key == "fm.layers") cfg.fm.layers = std::stoi(value);
    else if (key == "fm.heads") cfg.fm.heads = std::stoi(value);
    else if (key == "fm.hidden") cfg.fm.hidden = std::stoi(value);
    else if (key == "fm.ffn") cfg.fm.ffn = std::stoi(value);
    else if (key == "fm.ode_steps") cfg.fm.ode_steps = std::stoi(value);
    else if (key == "fm.cfg_scale") cfg.fm.cfg_scale = std::stod(value);
    else if (key == "fm.cond_drop_prob")
      cfg.fm.cond_drop_prob = std::stod(value);
    else if (key == "d_cond") {
      cfg.lm.d_cond = std::stoi(value);
      cfg.fm.d_cond = std::stoi(value);
      cfg.mpe.d_cond = std::stoi(value);
    } else if (key == "mpe.ref_blocks") cfg.mpe.ref_blocks = std::stoi(value);
    else if (key == "mpe.ref_heads") cfg.mpe.ref_heads = std::stoi(value);
    else if (key == "mpe.ref_ffn") cfg.mpe.ref_ffn = std::stoi(value);
    else if (key == "mpe.prompt_seconds")
      cfg.mpe.prompt_seconds = std::stod(value);
    else if (key == "mpe.num_queries") cfg.mpe.num_queries = std::stoi(value);
    else if (key == "mpe.q_hidden") cfg.mpe.q_hidden = std::stoi(value);
    else if (key == "mpe.q_layers") cfg.mpe.q_layers = std::stoi(value);
    else if (key == "mpe.q_heads") cfg.mpe.q_heads = std::stoi(value);
    else if (key == "mpe.q_ffn") cfg.mpe.q_ffn = std::stoi(value);
    else if (key == "mpe.prior_blocks")
      cfg.mpe.prior_blocks = std::stoi(value);
    else if (key == "mpe.prior_heads") cfg.mpe.prior_heads = std::stoi(value);
    else if (key == "mpe.prior_ffn") cfg.mpe.prior_ffn = std::stoi(value);
    else if (key == "mpe.diffusion_steps")
      cfg.mpe.diffusion_steps = std::stoi(value);
    else
      throw std::invalid_argument("unknown config key " + key);
  }
  return cfg;
}

HarnessConfig harness_config(const TrainRunConfig& cfg) {
  HarnessConfig h;
  h.run_dir = cfg.run_dir;
  h.steps = cfg.steps;
  h.seed = cfg.seed;
  h.lr = cfg.lr;
  h.total_schedule_steps = cfg.total_schedule_steps;
  h.generation_loss_weight = cfg.generation_loss_weight;
  h.modality_keep_prob = cfg.modality_keep_prob;
  return h;
}

TrainModels make_fresh_models(const TrainRunConfig& cfg) {
  TrainModels m;
  m.codebook = tokenizer::load_codebook(cfg.codebook_path);
  m.lexicon_path = cfg.lexicon_path;
  m.lexicon = lm::Lexicon::load(cfg.lexicon_path);
  m.synonyms_path = cfg.synonyms_path;
  m.codec = codec::load_codec(cfg.codec_dir);

  lm::LMConfig lm_cfg = cfg.lm;
  lm_cfg.k_tokens = m.codebook.k();
  lm_cfg.phoneme_count = m.lexicon.phoneme_count();
  fm::FMConfig fm_cfg = cfg.fm;
  fm_cfg.k_tokens = m.codebook.k();
  fm_cfg.d_lat = m.codec.cfg.d_lat;
  fm_cfg.latent_rate_hz = m.codec.cfg.latent_rate_hz();

  m.lm = lm::LMModel::init(lm_cfg, Rng::mix(cfg.seed, fnv1a64("lm")));
  m.fm = fm::FMModel::init(fm_cfg, Rng::mix(cfg.seed, fnv1a64("fm")));
  m.mpe_lm = mpe::MPEModel::init(cfg.mpe, Stage::lm,
                                 Rng::mix(cfg.seed, fnv1a64("mpe_lm")));
  m.mpe_ac = mpe::MPEModel::init(cfg.mpe, Stage::acoustic,
                                 Rng::mix(cfg.seed, fnv1a64("mpe_ac")));
  return m;
}

}  // namespace train
}  // namespace flespeech
