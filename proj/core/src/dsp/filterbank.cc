// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#include "flespeech/dsp/filterbank.h"

#include <cmath>
#include <cstddef>
#include <vector>

#include "flespeech/common/error.h"

namespace flespeech {
namespace dsp {

namespace {

constexpr double kPi = 3.14159265358979323846;

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

}  // namespace

nn::Tensor mel_filter_matrix(int window, int sample_rate, int num_bands) {
  const int bins = window / 2 + 1;
  nn::Tensor m = nn::Tensor::zeros({bins, num_bands});
  const double fmax = sample_rate / 2.0;
  const double mel_max = hz_to_mel(fmax);
  // num_bands triangles need num_bands + 2 edge frequencies.
  std::vector<double> edges((size_t)num_bands + 2);
  for (int i = 0; i < num_bands + 2; ++i) {
    edges[(size_t)i] = mel_to_hz(mel_max * i / (num_bands + 1));
  }
  for (int k = 0; k < bins; ++k) {
    const double f = (double)k * sample_rate / window;
    for (int b = 0; b < num_bands; ++b) {
      const double lo = edges[(size_t)b];
      const double mid = edges[(size_t)b + 1];
      const double hi = edges[(size_t)b + 2];
      double w = 0.0;
      if (f > lo && f < mid) {
        w = (f - lo) / (mid - lo);
      } else if (f >= mid && f < hi) {
        w = (hi - f) / (hi - mid);
      }
      m.at(k, b) = w;
    }
  }
  return m;
}

FilterbankMatrices make_filterbank(const FeatureConfig& cfg) {
  const int n = cfg.window;
  const int bins = n / 2 + 1;
  FilterbankMatrices mats;
  mats.hann = nn::Tensor::zeros({1, n});
  for (int i = 0; i < n; ++i) {
    mats.hann.at(0, i) = 0.5 - 0.5 * std::cos(2.0 * kPi * i / n);
  }
  mats.dft_cos = nn::Tensor::zeros({n, bins});
  mats.dft_sin = nn::Tensor::zeros({n, bins});
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < bins; ++k) {
      const double ang = 2.0 * kPi * i * k / n;
      mats.dft_cos.at(i, k) = std::cos(ang);
      mats.dft_sin.at(i, k) = -std::sin(ang);
    }
  }
  mats.mel = mel_filter_matrix(n, cfg.sample_rate, cfg.num_bands);
  return mats;
}

int feature_frame_count(size_t n, const FeatureConfig& cfg) {
  if (n < (size_t)cfg.window) return 1;
  return (int)((n - (size_t)cfg.window) / (size_t)cfg.hop) + 1;
}

nn::Var log_mel_frames_var(const nn::Var& samples, const FeatureConfig& cfg,
                           const FilterbankMatrices& mats) {
  const size_t n = (size_t)samples.value().size();
  const int t = feature_frame_count(n, cfg);
  nn::Var frames = nn::frame_signal(samples, cfg.window, cfg.hop, t);
  nn::Var windowed =
      nn::mul(frames, nn::tile_rows(nn::Var::constant(mats.hann), t));
  nn::Var re = nn::matmul(windowed, nn::Var::constant(mats.dft_cos));
  nn::Var im = nn::matmul(windowed, nn::Var::constant(mats.dft_sin));
  nn::Var power = nn::add(nn::square(re), nn::square(im));
  nn::Var bands = nn::matmul(power, nn::Var::constant(mats.mel));
  return nn::log_op(nn::add_scalar(bands, cfg.log_floor));
}

nn::Tensor log_mel_frames(const AudioClip& clip, const FeatureConfig& cfg) {
  if (clip.empty()) throw EmptyAudioError("no samples");
  if (clip.sample_rate != cfg.sample_rate) {
    throw SampleRateMismatchError("clip rate differs from feature config");
  }
  FilterbankMatrices mats = make_filterbank(cfg);
  nn::Var x = nn::Var::constant(nn::Tensor::from_vector(
      {(int)clip.samples.size()}, clip.samples));
  return log_mel_frames_var(x, cfg, mats).value();
}

}  // namespace dsp
}  // namespace flespeech
