// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#include "flespeech/codec/codec.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "flespeech/common/error.h"
#include "flespeech/common/rng.h"
#include "flespeech/nn/autograd.h"
#include "flespeech/nn/ops.h"

namespace flespeech {
namespace codec {

namespace {

using nn::Var;

int latent_frames(size_t samples, int downsample) {
  return (int)((samples + (size_t)downsample - 1) / (size_t)downsample);
}

Var linear(const nn::ParamCtx& P, const std::string& prefix, const Var& x) {
  return nn::add_rowvec(nn::matmul(x, P(prefix + ".w")), P(prefix + ".b"));
}

// Encoder trunk shared by training and inference: frames -> hidden.
Var encoder_trunk(const nn::ParamCtx& P, const Var& frames) {
  return nn::gelu(linear(P, "enc.in", frames));
}

Var decoder_frames(const nn::ParamCtx& P, const Var& z) {
  Var h = nn::gelu(linear(P, "dec.in", z));
  return linear(P, "dec.out", h);
}

nn::ParamCtx frozen_ctx(const CodecModel& model) {
  return nn::ParamCtx{const_cast<nn::ParamStore*>(&model.params), true};
}

}  // namespace

CodecModel CodecModel::init(const CodecConfig& cfg, uint64_t seed) {
  CodecModel m;
  m.cfg = cfg;
  Rng rng(seed);
  const double std = 0.02;
  m.params.create_gaussian("enc.in.w", {cfg.downsample, cfg.hidden}, rng, std);
  m.params.create_full("enc.in.b", {cfg.hidden}, 0.0);
  m.params.create_gaussian("enc.mu.w", {cfg.hidden, cfg.d_lat}, rng, std);
  m.params.create_full("enc.mu.b", {cfg.d_lat}, 0.0);
  m.params.create_gaussian("enc.lv.w", {cfg.hidden, cfg.d_lat}, rng, std);
  m.params.create_full("enc.lv.b", {cfg.d_lat}, 0.0);
  m.params.create_gaussian("dec.in.w", {cfg.d_lat, cfg.hidden}, rng, std);
  m.params.create_full("dec.in.b", {cfg.hidden}, 0.0);
  m.params.create_gaussian("dec.out.w", {cfg.hidden, cfg.downsample}, rng, std);
  m.params.create_full("dec.out.b", {cfg.downsample}, 0.0);
  return m;
}

AcousticLatentSequence encode_latent(const AudioClip& audio,
                                     const CodecModel& model) {
  if (audio.empty()) throw EmptyAudioError("no samples");
  const int t = latent_frames(audio.num_samples(), model.cfg.downsample);
  nn::ParamCtx P = frozen_ctx(model);
  Var x = Var::constant(nn::Tensor::from_vector({(int)audio.samples.size()},
                                                audio.samples));
  Var frames =
      nn::frame_signal(x, model.cfg.downsample, model.cfg.downsample, t);
  Var mu = linear(P, "enc.mu", encoder_trunk(P, frames));
  AcousticLatentSequence out;
  out.latents = mu.value();
  out.frame_rate_hz = model.cfg.latent_rate_hz();
  return out;
}

AudioClip decode_audio(const AcousticLatentSequence& latents,
                       const CodecModel& model) {
  if (latents.latents.cols() != model.cfg.d_lat) {
    throw DimensionMismatchError("latent dim does not match codec");
  }
  nn::ParamCtx P = frozen_ctx(model);
  Var z = Var::constant(latents.latents);
  Var frames = decoder_frames(P, z);
  AudioClip clip;
  clip.sample_rate = model.cfg.sample_rate;
  clip.samples = frames.value().vec();
  return clip;
}

nn::Var codec_loss_var(const std::vector<AudioClip>& batch,
                       const nn::ParamCtx& P, const CodecConfig& cfg,
                       const dsp::FilterbankMatrices& mats, uint64_t seed,
                       CodecLossReport* report) {
  if (batch.empty()) throw EmptyAudioError("empty batch");
  dsp::FeatureConfig fb_cfg;
  fb_cfg.sample_rate = cfg.sample_rate;

  Var recon_acc = Var::constant(nn::Tensor::scalar(0.0));
  Var kl_acc = Var::constant(nn::Tensor::scalar(0.0));
  for (size_t b = 0; b < batch.size(); ++b) {
    const AudioClip& clip = batch[b];
    if (clip.empty()) throw EmptyAudioError("empty clip in batch");
    const int t = latent_frames(clip.num_samples(), cfg.downsample);
    const int padded = t * cfg.downsample;
    nn::Tensor x_pad = nn::Tensor::zeros({padded});
    for (size_t i = 0; i < clip.num_samples(); ++i) {
      x_pad.at((int)i) = clip.samples[i];
    }

    Var x = Var::constant(x_pad);
    Var frames = nn::frame_signal(x, cfg.downsample, cfg.downsample, t);
    Var h = encoder_trunk(P, frames);
    Var mu = linear(P, "enc.mu", h);
    Var logvar = linear(P, "enc.lv", h);

    Rng rng(Rng::mix(seed, b));
    nn::Tensor eps = nn::Tensor::zeros({t, cfg.d_lat});
    for (double& v : eps.vec()) v = rng.gaussian();
    Var z = nn::add(
        mu, nn::mul(nn::exp_op(nn::scale(logvar, 0.5)), Var::constant(eps)));

    Var out_frames = decoder_frames(P, z);
    Var out_wave = nn::reshape(out_frames, {padded});
    Var l1 = nn::l1_loss(out_wave, x);
    Var feats_out = dsp::log_mel_frames_var(out_wave, fb_cfg, mats);
    Var feats_in = dsp::log_mel_frames_var(x, fb_cfg, mats);
    Var l2 = nn::mse_loss(feats_out, feats_in);
    recon_acc = nn::add(recon_acc, nn::add(l1, l2));

    // KL(N(mu, sigma^2) || N(0, 1)) averaged over frames and dimensions.
    Var term = nn::add_scalar(
        nn::sub(nn::add(nn::square(mu), nn::exp_op(logvar)), logvar), -1.0);
    kl_acc = nn::add(kl_acc, nn::scale(nn::mean_all(term), 0.5));
  }
  const double inv_b = 1.0 / (double)batch.size();
  Var recon = nn::scale(recon_acc, inv_b);
  Var kl = nn::scale(kl_acc, inv_b);
  Var total = nn::add(recon, nn::scale(kl, cfg.kl_weight));
  if (report != nullptr) {
    report->reconstruction = recon.value().at(0);
    report->kl = kl.value().at(0);
    report->total = total.value().at(0);
  }
  return total;
}

CodecLossReport codec_train_step(const std::vector<AudioClip>& batch,
                                 CodecModel& model, nn::AdamW& opt, double lr,
                                 uint64_t seed) {
  dsp::FeatureConfig fb_cfg;
  fb_cfg.sample_rate = model.cfg.sample_rate;
  dsp::FilterbankMatrices mats = dsp::make_filterbank(fb_cfg);
  CodecLossReport report;
  nn::ParamCtx P{&model.params, false};
  model.params.zero_grads();
  Var total = codec_loss_var(batch, P, model.cfg, mats, seed, &report);
  nn::backward(total);
  opt.step(model.params, lr);
  return report;
}

void save_codec(const std::string& dir, const CodecModel& model) {
  std::filesystem::create_directories(dir);
  nlohmann::json j;
  j["type"] = "codec";
  j["d_lat"] = model.cfg.d_lat;
  j["downsample"] = model.cfg.downsample;
  j["kl_weight"] = model.cfg.kl_weight;
  j["hidden"] = model.cfg.hidden;
  j["sample_rate"] = model.cfg.sample_rate;
  const std::string cfg_tmp = dir + "/config.json.tmp";
  {
    std::ofstream f(cfg_tmp);
    f << j.dump(2) << "\n";
  }
  std::filesystem::rename(cfg_tmp, dir + "/config.json");
  model.params.save(dir + "/params.fls");
}

CodecModel load_codec(const std::string& dir) {
  std::ifstream f(dir + "/config.json");
  if (!f) throw IoError("missing codec config in " + dir);
  nlohmann::json j = nlohmann::json::parse(f);
  CodecConfig cfg;
  cfg.d_lat = j.at("d_lat").get<int>();
  cfg.downsample = j.at("downsample").get<int>();
  cfg.kl_weight = j.at("kl_weight").get<double>();
  cfg.hidden = j.at("hidden").get<int>();
  cfg.sample_rate = j.at("sample_rate").get<int>();
  CodecModel m;
  m.cfg = cfg;
  m.params.load(dir + "/params.fls");
  return m;
}

}  // namespace codec
}  // namespace flespeech
