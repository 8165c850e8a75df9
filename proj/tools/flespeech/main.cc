// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end composing the library: corpus building, codebook
// fitting, per-component toy training, the three-stage harness, evaluation,
// and the end-user synthesis / editing commands.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "flespeech/audio/wav.h"
#include "flespeech/clients/clients.h"
#include "flespeech/codec/codec.h"
#include "flespeech/common/error.h"
#include "flespeech/common/rng.h"
#include "flespeech/data/corpus.h"
#include "flespeech/data/manifest.h"
#include "flespeech/eval/eval.h"
#include "flespeech/fm/fm.h"
#include "flespeech/lm/lm.h"
#include "flespeech/media/image.h"
#include "flespeech/mpe/mpe.h"
#include "flespeech/pipeline/pipeline.h"
#include "flespeech/tokenizer/tokenizer.h"
#include "flespeech/train/config.h"
#include "flespeech/train/stages.h"

#include "CLI11.hpp"
#include "json.hpp"

namespace {

using namespace flespeech;

std::vector<data::ManifestEntry> accepted_entries(
    const std::vector<std::string>& manifests) {
  std::vector<data::ManifestEntry> out;
  for (const auto& path : manifests) {
    for (auto& e : data::read_manifest(path)) {
      if (e.accepted) out.push_back(std::move(e));
    }
  }
  if (out.empty()) {
    throw EmptyManifestError("no accepted entries in the given manifests");
  }
  return out;
}

std::vector<AudioClip> load_audio(const std::vector<data::ManifestEntry>& entries) {
  std::vector<AudioClip> clips;
  clips.reserve(entries.size());
  for (const auto& e : entries) clips.push_back(read_wav(e.audio_path));
  return clips;
}

ConditionEmbedding zero_condition(Stage stage, int d_cond) {
  ConditionEmbedding c;
  c.vector = nn::Tensor::zeros({1, d_cond});
  c.source_stage = stage;
  return c;
}

std::string condition_to_json(const ConditionEmbedding& c) {
  nlohmann::json j;
  j["stage"] = stage_name(c.source_stage);
  j["values"] = c.vector.vec();
  return j.dump();
}

ConditionEmbedding condition_from_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open condition file " + path);
  nlohmann::json j = nlohmann::json::parse(f);
  ConditionEmbedding c;
  c.source_stage = stage_from_name(j.at("stage").get<std::string>());
  std::vector<double> values = j.at("values").get<std::vector<double>>();
  c.vector = nn::Tensor::from_vector({1, (int)values.size()}, std::move(values));
  return c;
}

std::string tokens_to_json(const tokenizer::SemanticTokenSequence& t,
                           bool truncated) {
  nlohmann::json j;
  j["tokens"] = t.tokens;
  j["frame_rate_hz"] = t.frame_rate_hz;
  j["truncated"] = truncated;
  return j.dump();
}

tokenizer::SemanticTokenSequence tokens_from_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open token file " + path);
  nlohmann::json j = nlohmann::json::parse(f);
  tokenizer::SemanticTokenSequence t;
  t.tokens = j.at("tokens").get<std::vector<int>>();
  t.frame_rate_hz = j.at("frame_rate_hz").get<double>();
  return t;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text << "\n";
    return;
  }
  std::ofstream f(out_path);
  if (!f) throw IoError("cannot write " + out_path);
  f << text << "\n";
}

// ---------------------------------------------------------------------------
// tokenizer fit

struct TokenizerFitArgs {
  std::vector<std::string> manifests;
  int k = 300;
  std::uint64_t seed = 0;
  std::string out;
};

void run_tokenizer_fit(const TokenizerFitArgs& a) {
  auto entries = accepted_entries(a.manifests);
  dsp::FeatureConfig feat_cfg;
  std::vector<tokenizer::FeatureFrameSequence> features;
  features.reserve(entries.size());
  for (const auto& e : entries) {
    features.push_back(tokenizer::extract_features(read_wav(e.audio_path), feat_cfg));
  }
  tokenizer::KMeansTrace trace;
  auto codebook = tokenizer::fit_codebook(features, a.k, a.seed, &trace);
  tokenizer::save_codebook(a.out, codebook);
  std::printf("fitted codebook %s: K=%d D=%d from %zu clips", a.out.c_str(),
              codebook.k(), codebook.dim(), features.size());
  if (!trace.objective.empty()) {
    std::printf(", objective %.4f -> %.4f", trace.objective.front(),
                trace.objective.back());
  }
  std::printf("\n");
}

// ---------------------------------------------------------------------------
// codec train

struct CodecTrainArgs {
  std::vector<std::string> manifests;
  long long steps = 200;
  std::uint64_t seed = 0;
  double lr = 1e-3;
  std::string out;
  codec::CodecConfig cfg;
};

void run_codec_train(const CodecTrainArgs& a) {
  auto clips = load_audio(accepted_entries(a.manifests));
  auto model = codec::CodecModel::init(a.cfg, a.seed);
  nn::AdamW opt;
  codec::CodecLossReport report;
  for (long long step = 0; step < a.steps; ++step) {
    std::vector<AudioClip> batch = {clips[(std::size_t)(step % (long long)clips.size())]};
    report = codec::codec_train_step(batch, model, opt, a.lr,
                                     Rng::mix(a.seed, (std::uint64_t)step));
    if (step == 0 || (step + 1) % 50 == 0 || step + 1 == a.steps) {
      std::printf("step %lld  total %.6f  recon %.6f  kl %.6f\n", step + 1,
                  report.total, report.reconstruction, report.kl);
    }
  }
  codec::save_codec(a.out, model);
  std::printf("saved codec to %s\n", a.out.c_str());
}

// ---------------------------------------------------------------------------
// lm train / generate

struct LmTrainArgs {
  std::vector<std::string> manifests;
  std::string codebook;
  std::string lexicon;
  long long steps = 200;
  std::uint64_t seed = 0;
  double lr = 1e-3;
  std::string out;
  lm::LMConfig cfg;
};

void run_lm_train(const LmTrainArgs& a) {
  auto entries = accepted_entries(a.manifests);
  auto codebook = tokenizer::load_codebook(a.codebook);
  auto lexicon = lm::Lexicon::load(a.lexicon);
  lm::LMConfig cfg = a.cfg;
  cfg.k_tokens = codebook.k();
  cfg.phoneme_count = lexicon.phoneme_count();
  auto model = lm::LMModel::init(cfg, a.seed);
  nn::AdamW opt;
  dsp::FeatureConfig feat_cfg;
  nn::ParamCtx P{&model.params, false};
  double loss = 0.0;
  for (long long step = 0; step < a.steps; ++step) {
    const auto& e = entries[(std::size_t)(step % (long long)entries.size())];
    auto audio = read_wav(e.audio_path);
    auto tokens = tokenizer::tokenize(tokenizer::extract_features(audio, feat_cfg),
                                      codebook);
    auto phonemes = lm::text_to_phonemes(e.transcript, lexicon);
    nn::Var cond = nn::Var::constant(nn::Tensor::zeros({1, cfg.d_cond}));
    nn::Var l = lm::lm_loss_var(phonemes, cond, tokens, P, cfg);
    model.params.zero_grads();
    nn::backward(l);
    opt.step(model.params, a.lr);
    loss = l.value().at(0);
    if (step == 0 || (step + 1) % 50 == 0 || step + 1 == a.steps) {
      std::printf("step %lld  loss %.6f\n", step + 1, loss);
    }
  }
  lm::save_lm(a.out, model);
  std::printf("saved lm to %s\n", a.out.c_str());
}

struct LmGenerateArgs {
  std::string text;
  std::string lm_dir;
  std::string lexicon;
  std::string condition_from;
  lm::SamplingConfig sampling;
  std::string out;
};

void run_lm_generate(const LmGenerateArgs& a) {
  auto model = lm::load_lm(a.lm_dir);
  auto lexicon = lm::Lexicon::load(a.lexicon);
  ConditionEmbedding cond = a.condition_from.empty()
                                ? zero_condition(Stage::lm, model.cfg.d_cond)
                                : condition_from_json_file(a.condition_from);
  auto phonemes = lm::text_to_phonemes(a.text, lexicon);
  auto gen = lm::lm_generate(phonemes, cond, model, a.sampling);
  emit(tokens_to_json(gen.tokens, gen.truncated), a.out);
  std::fprintf(stderr, "generated %zu tokens%s\n", gen.tokens.tokens.size(),
               gen.truncated ? " (truncated)" : "");
}

// ---------------------------------------------------------------------------
// fm train / sample

struct FmTrainArgs {
  std::vector<std::string> manifests;
  std::string codebook;
  std::string codec_dir;
  long long steps = 200;
  std::uint64_t seed = 0;
  double lr = 1e-3;
  std::string out;
  fm::FMConfig cfg;
};

void run_fm_train(const FmTrainArgs& a) {
  auto entries = accepted_entries(a.manifests);
  auto codebook = tokenizer::load_codebook(a.codebook);
  auto codec = codec::load_codec(a.codec_dir);
  fm::FMConfig cfg = a.cfg;
  cfg.k_tokens = codebook.k();
  cfg.d_lat = codec.cfg.d_lat;
  cfg.latent_rate_hz = codec.cfg.latent_rate_hz();
  auto model = fm::FMModel::init(cfg, a.seed);
  nn::AdamW opt;
  dsp::FeatureConfig feat_cfg;
  nn::ParamCtx P{&model.params, false};
  fm::FMLossReport report;
  for (long long step = 0; step < a.steps; ++step) {
    const auto& e = entries[(std::size_t)(step % (long long)entries.size())];
    auto audio = read_wav(e.audio_path);
    auto tokens = tokenizer::tokenize(tokenizer::extract_features(audio, feat_cfg),
                                      codebook);
    auto x1 = codec::encode_latent(audio, codec);
    nn::Var cond = nn::Var::constant(nn::Tensor::zeros({1, cfg.d_cond}));
    nn::Var l = fm::fm_loss_var(tokens, cond, x1, P, cfg,
                                Rng::mix(a.seed, (std::uint64_t)step),
                                /*train_mode=*/true, &report);
    model.params.zero_grads();
    nn::backward(l);
    opt.step(model.params, a.lr);
    if (step == 0 || (step + 1) % 50 == 0 || step + 1 == a.steps) {
      std::printf("step %lld  loss %.6f%s\n", step + 1, report.loss,
                  report.condition_dropped ? "  (cond dropped)" : "");
    }
  }
  fm::save_fm(a.out, model);
  std::printf("saved fm to %s\n", a.out.c_str());
}

struct FmSampleArgs {
  std::string tokens;
  std::string fm_dir;
  std::string codec_dir;
  std::string condition_from;
  std::uint64_t seed = 0;
  std::string out;
};

void run_fm_sample(const FmSampleArgs& a) {
  auto model = fm::load_fm(a.fm_dir);
  auto codec = codec::load_codec(a.codec_dir);
  auto tokens = tokens_from_json_file(a.tokens);
  ConditionEmbedding cond =
      a.condition_from.empty()
          ? zero_condition(Stage::acoustic, model.cfg.d_cond)
          : condition_from_json_file(a.condition_from);
  auto latents = fm::ode_sample(tokens, cond, model, a.seed);
  auto audio = codec::decode_audio(latents, codec);
  write_wav(a.out, audio);
  std::printf("wrote %s (%.2f s)\n", a.out.c_str(), audio.duration_s());
}

// ---------------------------------------------------------------------------
// mpe sample

struct MpeSampleArgs {
  std::string stage;
  std::string models_dir;
  std::string text;
  std::string audio;
  std::string image;
  std::vector<std::string> video;
  std::string face_caption;
  std::uint64_t seed = 0;
  std::string out;
};

void run_mpe_sample(const MpeSampleArgs& a) {
  auto models = pipeline::load_model_set(a.models_dir);
  pipeline::OfflineEncoders enc(models);
  mpe::PromptBundle bundle;
  if (!a.text.empty()) bundle.set_text(a.text);
  if (!a.audio.empty()) bundle.set_audio(read_wav(a.audio));
  if (!a.image.empty()) bundle.set_image(read_pnm(a.image));
  if (!a.video.empty()) {
    std::vector<Image> frames;
    for (const auto& p : a.video) frames.push_back(read_pnm(p));
    bundle.set_video(std::move(frames));
  }
  if (!a.face_caption.empty()) bundle.set_face_caption(a.face_caption);
  Stage stage = a.stage == "lm" ? Stage::lm : Stage::acoustic;
  const mpe::MPEModel* model = stage == Stage::lm ? &models.mpe_lm : &models.mpe_ac;
  auto cond = mpe::sample_condition(bundle, enc.clients(), model, stage, a.seed);
  emit(condition_to_json(cond), a.out);
}

// ---------------------------------------------------------------------------
// data build

struct DataBuildArgs {
  std::string in_dir;
  std::string out;
  std::string synonyms;
  std::uint64_t seed = 0;
};

void run_data_build(const DataBuildArgs& a) {
  data::BuildConfig cfg;
  cfg.input_dir = a.in_dir;
  cfg.output_manifest = a.out;
  cfg.synonyms_path = a.synonyms;
  cfg.seed = a.seed;
  auto report = data::build_corpus_manifest(cfg, data::BuildClients{});
  std::printf("manifest %s: %d clips, %d accepted, %d rejected, %d labeled\n",
              a.out.c_str(), report.total, report.accepted, report.rejected,
              report.labeled);
}

// ---------------------------------------------------------------------------
// train (three-stage harness)

struct TrainArgs {
  int stage = 1;
  std::string config;
};

void run_train(const TrainArgs& a) {
  auto cfg = train::parse_train_config(a.config);
  auto plan = train::plan_for_stage(a.stage, cfg.manifests);
  auto models = train::make_fresh_models(cfg);
  auto report = train::run_stage(plan, models, train::harness_config(cfg));
  std::printf("stage %d: steps %lld -> %lld\n", report.stage_number,
              report.start_step, report.end_step);
  for (const auto& [term, value] : report.first_terms) {
    std::printf("  %s: %.6f -> %.6f\n", term.c_str(), value,
                report.last_terms.at(term));
  }
  std::printf("checkpoint: %s\n", report.checkpoint_dir.c_str());
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string synth_manifest;
  std::string ref_manifest;
  std::string out_dir;
  std::string models_dir;
};

void run_eval(const EvalArgs& a) {
  auto models = pipeline::load_model_set(a.models_dir);
  eval::EvalConfig cfg;
  cfg.synth_manifest = a.synth_manifest;
  cfg.ref_manifest = a.ref_manifest;
  cfg.out_dir = a.out_dir;
  auto summary = eval::run_evaluation(cfg, models.mpe_ac);
  std::printf("similarity diagonal dominance: %.4f (%d synth, %d ref)\n",
              summary.diagonal_dominance, summary.synth_clips,
              summary.ref_clips);
  for (const auto& [attr, acc] : summary.attribute_accuracy) {
    std::printf("  %s accuracy: %.3f\n", attr.c_str(), acc);
  }
  std::printf("report written to %s\n", a.out_dir.c_str());
}

// ---------------------------------------------------------------------------
// synth / edit-style / convert-voice

struct SynthArgs {
  std::string text;
  std::string s1_text;
  std::string s1_audio;
  std::string s1_image;
  std::string s2_audio;
  std::string s2_image;
  std::string s2_face_caption;
  std::string models_dir;
  std::uint64_t seed = 0;
  std::string out;
  lm::SamplingConfig sampling;
};

void run_synth(const SynthArgs& a) {
  auto models = pipeline::load_model_set(a.models_dir);
  pipeline::OfflineEncoders enc(models);
  pipeline::SynthesisRequest request;
  request.text = a.text;
  if (!a.s1_text.empty()) request.stage1_prompts.set_text(a.s1_text);
  if (!a.s1_audio.empty()) request.stage1_prompts.set_audio(read_wav(a.s1_audio));
  if (!a.s1_image.empty()) request.stage1_prompts.set_image(read_pnm(a.s1_image));
  if (!a.s2_audio.empty()) request.stage2_prompts.set_audio(read_wav(a.s2_audio));
  if (!a.s2_image.empty()) request.stage2_prompts.set_image(read_pnm(a.s2_image));
  if (!a.s2_face_caption.empty()) {
    request.stage2_prompts.set_face_caption(a.s2_face_caption);
  }
  request.seed = a.seed;
  request.sampling = a.sampling;
  auto result = pipeline::synthesize(request, models, enc.clients());
  pipeline::write_synthesis_output(a.out, result);
  std::printf("wrote %s (%.2f s, %d tokens%s)\n", a.out.c_str(),
              result.audio.duration_s(), result.provenance.generated_tokens,
              result.provenance.truncated ? ", truncated" : "");
}

struct EditArgs {
  std::string audio;
  std::string caption;  // style caption or face caption per command
  std::string transcript;
  std::string models_dir;
  std::uint64_t seed = 0;
  std::string out;
  lm::SamplingConfig sampling;
};

void run_edit_style(const EditArgs& a) {
  auto models = pipeline::load_model_set(a.models_dir);
  pipeline::OfflineEncoders enc(models);
  auto source = read_wav(a.audio);
  clients::SuppliedTranscriptAsr asr =
      a.transcript.empty() ? clients::SuppliedTranscriptAsr()
                           : clients::SuppliedTranscriptAsr(a.transcript);
  auto result = pipeline::edit_style(source, a.caption, models, enc.clients(),
                                     asr, a.seed, a.sampling);
  pipeline::write_synthesis_output(a.out, result);
  std::printf("wrote %s (%.2f s)\n", a.out.c_str(), result.audio.duration_s());
}

void run_convert_voice(const EditArgs& a) {
  auto models = pipeline::load_model_set(a.models_dir);
  pipeline::OfflineEncoders enc(models);
  auto source = read_wav(a.audio);
  clients::SuppliedTranscriptAsr asr =
      a.transcript.empty() ? clients::SuppliedTranscriptAsr()
                           : clients::SuppliedTranscriptAsr(a.transcript);
  auto result = pipeline::convert_voice_by_caption(
      source, a.caption, models, enc.clients(), asr, a.seed, a.sampling);
  pipeline::write_synthesis_output(a.out, result);
  std::printf("wrote %s (%.2f s)\n", a.out.c_str(), result.audio.duration_s());
}

void add_sampling_options(CLI::App* cmd, lm::SamplingConfig& s) {
  cmd->add_option("--max-tokens", s.max_tokens, "Generation length cap");
  cmd->add_option("--min-tokens", s.min_tokens, "Suppress EOS before this many tokens");
  cmd->add_option("--temperature", s.temperature, "Softmax temperature");
  cmd->add_option("--top-k", s.top_k, "Top-k cutoff, 0 disables");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-stage controllable speech generation"};
  app.require_subcommand(1);

  // tokenizer fit
  auto tok_args = std::make_shared<TokenizerFitArgs>();
  CLI::App* tok = app.add_subcommand("tokenizer", "Semantic tokenizer commands");
  tok->require_subcommand(1);
  CLI::App* tok_fit = tok->add_subcommand("fit", "Fit a k-means codebook");
  tok_fit->add_option("--manifest", tok_args->manifests, "Manifest JSONL")->required();
  tok_fit->add_option("--k", tok_args->k, "Codebook size");
  tok_fit->add_option("--seed", tok_args->seed, "Seeding RNG");
  tok_fit->add_option("--out", tok_args->out, "Output codebook path")->required();
  tok_fit->callback([tok_args] { run_tokenizer_fit(*tok_args); });

  // codec train
  auto codec_args = std::make_shared<CodecTrainArgs>();
  CLI::App* codec_cmd = app.add_subcommand("codec", "Acoustic codec commands");
  codec_cmd->require_subcommand(1);
  CLI::App* codec_train = codec_cmd->add_subcommand("train", "Train the waveform VAE");
  codec_train->add_option("--manifest", codec_args->manifests, "Manifest JSONL")->required();
  codec_train->add_option("--steps", codec_args->steps, "Optimization steps");
  codec_train->add_option("--seed", codec_args->seed, "Run seed");
  codec_train->add_option("--lr", codec_args->lr, "Learning rate");
  codec_train->add_option("--out", codec_args->out, "Checkpoint directory")->required();
  codec_train->add_option("--d-lat", codec_args->cfg.d_lat, "Latent width");
  codec_train->add_option("--hidden", codec_args->cfg.hidden, "Hidden width");
  codec_train->add_option("--downsample", codec_args->cfg.downsample, "Samples per latent frame");
  codec_train->add_option("--kl-weight", codec_args->cfg.kl_weight, "KL term weight");
  codec_train->callback([codec_args] { run_codec_train(*codec_args); });

  // lm train / generate
  auto lm_train_args = std::make_shared<LmTrainArgs>();
  auto lm_gen_args = std::make_shared<LmGenerateArgs>();
  CLI::App* lm_cmd = app.add_subcommand("lm", "Semantic language model commands");
  lm_cmd->require_subcommand(1);
  CLI::App* lm_train = lm_cmd->add_subcommand("train", "Train the token LM alone");
  lm_train->add_option("--manifest", lm_train_args->manifests, "Manifest JSONL")->required();
  lm_train->add_option("--codebook", lm_train_args->codebook, "Codebook binary")->required();
  lm_train->add_option("--lexicon", lm_train_args->lexicon, "Lexicon JSON")->required();
  lm_train->add_option("--steps", lm_train_args->steps, "Optimization steps");
  lm_train->add_option("--seed", lm_train_args->seed, "Run seed");
  lm_train->add_option("--lr", lm_train_args->lr, "Learning rate");
  lm_train->add_option("--out", lm_train_args->out, "Checkpoint directory")->required();
  lm_train->add_option("--layers", lm_train_args->cfg.layers, "Transformer layers");
  lm_train->add_option("--heads", lm_train_args->cfg.heads, "Attention heads");
  lm_train->add_option("--hidden", lm_train_args->cfg.hidden, "Model width");
  lm_train->add_option("--ffn", lm_train_args->cfg.ffn, "Feed-forward width");
  lm_train->add_option("--d-cond", lm_train_args->cfg.d_cond, "Condition width");
  lm_train->callback([lm_train_args] { run_lm_train(*lm_train_args); });

  CLI::App* lm_gen = lm_cmd->add_subcommand("generate", "Sample semantic tokens from text");
  lm_gen->add_option("--text", lm_gen_args->text, "Input text")->required();
  lm_gen->add_option("--lm", lm_gen_args->lm_dir, "LM checkpoint directory")->required();
  lm_gen->add_option("--lexicon", lm_gen_args->lexicon, "Lexicon JSON")->required();
  lm_gen->add_option("--condition-from", lm_gen_args->condition_from,
                     "Condition embedding JSON (default: zeros)");
  lm_gen->add_option("--seed", lm_gen_args->sampling.seed, "Sampling seed");
  add_sampling_options(lm_gen, lm_gen_args->sampling);
  lm_gen->add_option("--out", lm_gen_args->out, "Token JSON path (default: stdout)");
  lm_gen->callback([lm_gen_args] { run_lm_generate(*lm_gen_args); });

  // fm train / sample
  auto fm_train_args = std::make_shared<FmTrainArgs>();
  auto fm_sample_args = std::make_shared<FmSampleArgs>();
  CLI::App* fm_cmd = app.add_subcommand("fm", "Flow-matching model commands");
  fm_cmd->require_subcommand(1);
  CLI::App* fm_train = fm_cmd->add_subcommand("train", "Train the velocity field alone");
  fm_train->add_option("--manifest", fm_train_args->manifests, "Manifest JSONL")->required();
  fm_train->add_option("--codebook", fm_train_args->codebook, "Codebook binary")->required();
  fm_train->add_option("--codec", fm_train_args->codec_dir, "Codec checkpoint")->required();
  fm_train->add_option("--steps", fm_train_args->steps, "Optimization steps");
  fm_train->add_option("--seed", fm_train_args->seed, "Run seed");
  fm_train->add_option("--lr", fm_train_args->lr, "Learning rate");
  fm_train->add_option("--out", fm_train_args->out, "Checkpoint directory")->required();
  fm_train->add_option("--layers", fm_train_args->cfg.layers, "Transformer layers");
  fm_train->add_option("--heads", fm_train_args->cfg.heads, "Attention heads");
  fm_train->add_option("--hidden", fm_train_args->cfg.hidden, "Model width");
  fm_train->add_option("--ffn", fm_train_args->cfg.ffn, "Feed-forward width");
  fm_train->add_option("--d-cond", fm_train_args->cfg.d_cond, "Condition width");
  fm_train->add_option("--ode-steps", fm_train_args->cfg.ode_steps, "Euler steps at sampling");
  fm_train->add_option("--cfg-scale", fm_train_args->cfg.cfg_scale, "Guidance scale");
  fm_train->add_option("--cond-drop-prob", fm_train_args->cfg.cond_drop_prob,
                       "Training condition dropout");
  fm_train->callback([fm_train_args] { run_fm_train(*fm_train_args); });

  CLI::App* fm_sample = fm_cmd->add_subcommand("sample", "Decode tokens to audio");
  fm_sample->add_option("--tokens", fm_sample_args->tokens, "Token JSON")->required();
  fm_sample->add_option("--fm", fm_sample_args->fm_dir, "Flow checkpoint")->required();
  fm_sample->add_option("--codec", fm_sample_args->codec_dir, "Codec checkpoint")->required();
  fm_sample->add_option("--condition-from", fm_sample_args->condition_from,
                        "Condition embedding JSON (default: zeros)");
  fm_sample->add_option("--seed", fm_sample_args->seed, "Noise seed");
  fm_sample->add_option("--out", fm_sample_args->out, "Output WAV")->required();
  fm_sample->callback([fm_sample_args] { run_fm_sample(*fm_sample_args); });

  // mpe sample
  auto mpe_args = std::make_shared<MpeSampleArgs>();
  CLI::App* mpe_cmd = app.add_subcommand("mpe", "Multi-prompt encoder commands");
  mpe_cmd->require_subcommand(1);
  CLI::App* mpe_sample = mpe_cmd->add_subcommand("sample", "Sample a condition embedding");
  mpe_sample->add_option("--stage", mpe_args->stage, "lm or acoustic")
      ->required()
      ->check(CLI::IsMember({"lm", "acoustic"}));
  mpe_sample->add_option("--models", mpe_args->models_dir, "Model set directory")->required();
  mpe_sample->add_option("--text", mpe_args->text, "Text prompt");
  mpe_sample->add_option("--audio", mpe_args->audio, "Audio prompt WAV");
  mpe_sample->add_option("--image", mpe_args->image, "Image prompt PNM");
  mpe_sample->add_option("--video", mpe_args->video, "Video frame PNMs");
  mpe_sample->add_option("--face-caption", mpe_args->face_caption, "Face caption prompt");
  mpe_sample->add_option("--seed", mpe_args->seed, "Diffusion seed");
  mpe_sample->add_option("--out", mpe_args->out, "Embedding JSON path (default: stdout)");
  mpe_sample->callback([mpe_args] { run_mpe_sample(*mpe_args); });

  // data build
  auto data_args = std::make_shared<DataBuildArgs>();
  CLI::App* data_cmd = app.add_subcommand("data", "Dataset pipeline commands");
  data_cmd->require_subcommand(1);
  CLI::App* data_build = data_cmd->add_subcommand("build", "Build a labeled manifest");
  data_build->add_option("--in", data_args->in_dir, "Corpus directory")->required();
  data_build->add_option("--out", data_args->out, "Output manifest JSONL")->required();
  data_build->add_option("--synonyms", data_args->synonyms, "Synonym table JSON")->required();
  data_build->add_option("--seed", data_args->seed, "Caption phrasing seed");
  data_build->callback([data_args] { run_data_build(*data_args); });

  // train
  auto train_args = std::make_shared<TrainArgs>();
  CLI::App* train_cmd = app.add_subcommand("train", "Run one training stage");
  train_cmd->add_option("--stage", train_args->stage, "1, 2, or 3")
      ->required()
      ->check(CLI::Range(1, 3));
  train_cmd->add_option("--config", train_args->config, "Run config file")->required();
  train_cmd->callback([train_args] { run_train(*train_args); });

  // eval
  auto eval_args = std::make_shared<EvalArgs>();
  CLI::App* eval_cmd = app.add_subcommand("eval", "Similarity and attribute evaluation");
  eval_cmd->add_option("--synth", eval_args->synth_manifest, "Synthesized manifest")->required();
  eval_cmd->add_option("--ref", eval_args->ref_manifest, "Reference manifest")->required();
  eval_cmd->add_option("--out", eval_args->out_dir, "Report directory")->required();
  eval_cmd->add_option("--models", eval_args->models_dir, "Model set directory")->required();
  eval_cmd->callback([eval_args] { run_eval(*eval_args); });

  // synth
  auto synth_args = std::make_shared<SynthArgs>();
  CLI::App* synth_cmd = app.add_subcommand("synth", "Multi-prompt synthesis");
  synth_cmd->add_option("--text", synth_args->text, "Text to speak")->required();
  synth_cmd->add_option("--s1-text", synth_args->s1_text, "Stage-1 style caption");
  synth_cmd->add_option("--s1-audio", synth_args->s1_audio, "Stage-1 audio prompt WAV");
  synth_cmd->add_option("--s1-image", synth_args->s1_image, "Stage-1 image prompt PNM");
  synth_cmd->add_option("--s2-audio", synth_args->s2_audio, "Stage-2 audio prompt WAV");
  synth_cmd->add_option("--s2-image", synth_args->s2_image, "Stage-2 image prompt PNM");
  synth_cmd->add_option("--s2-face-caption", synth_args->s2_face_caption,
                        "Stage-2 face caption");
  synth_cmd->add_option("--models", synth_args->models_dir, "Model set directory")->required();
  synth_cmd->add_option("--seed", synth_args->seed, "Master seed");
  synth_cmd->add_option("--out", synth_args->out, "Output WAV")->required();
  add_sampling_options(synth_cmd, synth_args->sampling);
  synth_cmd->callback([synth_args] { run_synth(*synth_args); });

  // edit-style
  auto edit_args = std::make_shared<EditArgs>();
  CLI::App* edit_cmd = app.add_subcommand("edit-style", "Re-speak a clip in a captioned style");
  edit_cmd->add_option("--audio", edit_args->audio, "Source WAV")->required();
  edit_cmd->add_option("--caption", edit_args->caption, "Style caption")->required();
  edit_cmd->add_option("--transcript", edit_args->transcript,
                       "Transcript (omit to require an ASR client)");
  edit_cmd->add_option("--models", edit_args->models_dir, "Model set directory")->required();
  edit_cmd->add_option("--seed", edit_args->seed, "Master seed");
  edit_cmd->add_option("--out", edit_args->out, "Output WAV")->required();
  add_sampling_options(edit_cmd, edit_args->sampling);
  edit_cmd->callback([edit_args] { run_edit_style(*edit_args); });

  // convert-voice
  auto conv_args = std::make_shared<EditArgs>();
  CLI::App* conv_cmd = app.add_subcommand("convert-voice", "Move timbre via a face caption");
  conv_cmd->add_option("--audio", conv_args->audio, "Source WAV")->required();
  conv_cmd->add_option("--face-caption", conv_args->caption, "Edited face caption")->required();
  conv_cmd->add_option("--transcript", conv_args->transcript,
                       "Transcript (omit to require an ASR client)");
  conv_cmd->add_option("--models", conv_args->models_dir, "Model set directory")->required();
  conv_cmd->add_option("--seed", conv_args->seed, "Master seed");
  conv_cmd->add_option("--out", conv_args->out, "Output WAV")->required();
  add_sampling_options(conv_cmd, conv_args->sampling);
  conv_cmd->callback([conv_args] { run_convert_voice(*conv_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const flespeech::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
