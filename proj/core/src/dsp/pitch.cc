// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#include "flespeech/dsp/pitch.h"

#include <algorithm>
#include <cmath>

#include "flespeech/common/error.h"

namespace flespeech {
namespace dsp {

namespace {

// Autocorrelation at integer lag over one frame.
double autocorr(const double* x, int n, int lag) {
  double s = 0.0;
  for (int i = 0; i + lag < n; ++i) s += x[i] * x[i + lag];
  return s;
}

}  // namespace

PitchTrack track_pitch(const AudioClip& clip, const PitchConfig& cfg) {
  if (clip.empty()) throw EmptyAudioError("no samples");
  if (clip.sample_rate != cfg.sample_rate) {
    throw SampleRateMismatchError("clip rate differs from pitch config");
  }
  const int n = (int)clip.num_samples();
  const int lag_min =
      std::max(1, (int)std::floor(cfg.sample_rate / cfg.fmax_hz));
  const int lag_max = (int)std::ceil(cfg.sample_rate / cfg.fmin_hz);
  if (lag_max >= cfg.frame) throw TooFewFramesError("frame shorter than max lag");

  PitchTrack out;
  for (int start = 0; start + cfg.frame <= n; start += cfg.hop) {
    const double* x = clip.samples.data() + start;
    double energy = 0.0;
    for (int i = 0; i < cfg.frame; ++i) energy += x[i] * x[i];
    out.rms.push_back(std::sqrt(energy / cfg.frame));

    if (energy <= 0.0) {
      out.pitch_hz.push_back(0.0);
      continue;
    }
    int best_lag = lag_min;
    double best_r = -1e300;
    for (int lag = lag_min; lag <= lag_max; ++lag) {
      double r = autocorr(x, cfg.frame, lag);
      if (r > best_r) {
        best_r = r;
        best_lag = lag;
      }
    }
    if (best_r / energy <= cfg.voicing_threshold) {
      out.pitch_hz.push_back(0.0);
      continue;
    }
    // Parabolic refinement around the integer peak.
    double lag = (double)best_lag;
    if (best_lag > lag_min && best_lag < lag_max) {
      const double rl = autocorr(x, cfg.frame, best_lag - 1);
      const double rr = autocorr(x, cfg.frame, best_lag + 1);
      const double denom = rl - 2.0 * best_r + rr;
      if (denom < 0.0) {
        double delta = 0.5 * (rl - rr) / denom;
        delta = std::clamp(delta, -0.5, 0.5);
        lag += delta;
      }
    }
    out.pitch_hz.push_back(cfg.sample_rate / lag);
  }
  return out;
}

}  // namespace dsp
}  // namespace flespeech
