// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "flespeech/clients/clients.h"
#include "flespeech/common/error.h"
#include "flespeech/common/hash.h"
#include "flespeech/common/rng.h"
#include "flespeech/dsp/filterbank.h"

namespace flespeech {
namespace clients {

namespace {

std::string normalize(const std::string& text) {
  std::string out;
  bool last_space = true;
  for (char c : text) {
    unsigned char u = (unsigned char)c;
    if (std::isalnum(u)) {
      out.push_back((char)std::tolower(u));
      last_space = false;
    } else if (!last_space) {
      out.push_back(' ');
      last_space = true;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> words;
  std::istringstream in(s);
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

void token_unit_vector(const std::string& token, double* row, int dim) {
  Rng rng(fnv1a64(token));
  double norm2 = 0.0;
  for (int i = 0; i < dim; ++i) {
    row[i] = rng.gaussian();
    norm2 += row[i] * row[i];
  }
  const double inv = 1.0 / std::sqrt(std::max(norm2, 1e-300));
  for (int i = 0; i < dim; ++i) row[i] *= inv;
}

}  // namespace

void OfflineTextEncoder::add_canonical_phrase(const std::string& phrase,
                                              const std::string& canonical) {
  const std::string key = normalize(phrase);
  if (!key.empty()) canonical_[key] = canonical;
}

nn::Tensor OfflineTextEncoder::embed(const std::string& text) {
  const std::string norm = normalize(text);
  if (norm.empty()) throw EmptyTextError("text prompt is empty");
  std::vector<std::string> words = split(norm);

  // Greedy longest-phrase canonicalization over the word stream.
  size_t max_phrase_words = 1;
  for (const auto& [phrase, canon] : canonical_) {
    max_phrase_words =
        std::max(max_phrase_words, split(phrase).size());
  }
  std::vector<std::string> tokens;
  size_t i = 0;
  while (i < words.size()) {
    bool matched = false;
    const size_t longest = std::min(max_phrase_words, words.size() - i);
    for (size_t len = longest; len >= 1 && !matched; --len) {
      std::string candidate = words[i];
      for (size_t j = 1; j < len; ++j) candidate += " " + words[i + j];
      auto it = canonical_.find(candidate);
      if (it != canonical_.end()) {
        tokens.push_back(it->second);
        i += len;
        matched = true;
      }
    }
    if (!matched) {
      tokens.push_back(words[i]);
      ++i;
    }
  }

  nn::Tensor out = nn::Tensor::zeros({(int)tokens.size(), dim_});
  for (size_t r = 0; r < tokens.size(); ++r) {
    token_unit_vector(tokens[r], out.data() + r * (size_t)dim_, dim_);
  }
  return out;
}

OfflineVisionEncoder::OfflineVisionEncoder(int dim, int grid)
    : dim_(dim), grid_(grid) {
  Rng rng(fnv1a64("offline-vision-projection"));
  projection_ = nn::Tensor::zeros({3, dim});
  for (double& v : projection_.vec()) {
    v = rng.gaussian() / std::sqrt(3.0);
  }
}

nn::Tensor OfflineVisionEncoder::embed_image(const Image& image) {
  if (image.empty()) throw EmptyInputError("empty image");
  nn::Tensor out = nn::Tensor::zeros({grid_ * grid_, dim_});
  for (int gy = 0; gy < grid_; ++gy) {
    for (int gx = 0; gx < grid_; ++gx) {
      const int y0 = gy * image.height / grid_;
      const int y1 = std::max(y0 + 1, (gy + 1) * image.height / grid_);
      const int x0 = gx * image.width / grid_;
      const int x1 = std::max(x0 + 1, (gx + 1) * image.width / grid_);
      double mean[3] = {0.0, 0.0, 0.0};
      int count = 0;
      for (int y = y0; y < y1 && y < image.height; ++y) {
        for (int x = x0; x < x1 && x < image.width; ++x) {
          for (int c = 0; c < 3; ++c) {
            mean[c] += image.at(y, x, std::min(c, image.channels - 1));
          }
          ++count;
        }
      }
      for (double& m : mean) m /= std::max(count, 1);
      const int row = gy * grid_ + gx;
      for (int d = 0; d < dim_; ++d) {
        double v = 0.0;
        for (int c = 0; c < 3; ++c) v += mean[c] * projection_.at(c, d);
        out.at(row, d) = v;
      }
    }
  }
  return out;
}

nn::Tensor OfflineVisionEncoder::embed_video(const std::vector<Image>& frames) {
  if (frames.empty()) throw EmptyInputError("empty video");
  nn::Tensor out = nn::Tensor::zeros({(int)frames.size(), dim_});
  for (size_t f = 0; f < frames.size(); ++f) {
    nn::Tensor patches = embed_image(frames[f]);
    for (int d = 0; d < dim_; ++d) {
      double s = 0.0;
      for (int r = 0; r < patches.rows(); ++r) s += patches.at(r, d);
      out.at((int)f, d) = s / patches.rows();
    }
  }
  return out;
}

std::string OfflineCaptionCombiner::combine_captions(
    const std::string& static_caption, const std::string& dynamic_caption) {
  if (static_caption.empty()) throw EmptyCaptionError("empty static caption");
  if (dynamic_caption.empty()) throw EmptyCaptionError("empty dynamic caption");
  auto strip = [](std::string s) {
    while (!s.empty() && (s.back() == '.' || s.back() == ' ')) s.pop_back();
    return s;
  };
  return strip(static_caption) + ". While speaking, " +
         strip(dynamic_caption) + ".";
}

std::string SuppliedTranscriptAsr::transcribe(const AudioClip& audio) {
  (void)audio;
  if (!transcript_.has_value() || transcript_->empty()) {
    throw TranscriptUnavailableError("no transcript was supplied");
  }
  return *transcript_;
}

double OfflineSnrScorer::score(const AudioClip& audio) {
  if (audio.empty()) throw EmptyAudioError("no samples");
  const int frame = std::max(1, audio.sample_rate / 100);  // 10 ms
  std::vector<double> rms;
  for (size_t start = 0; start + (size_t)frame <= audio.num_samples();
       start += (size_t)frame) {
    double e = 0.0;
    for (int i = 0; i < frame; ++i) {
      const double s = audio.samples[start + (size_t)i];
      e += s * s;
    }
    rms.push_back(std::sqrt(e / frame));
  }
  if (rms.empty()) return 0.0;
  std::sort(rms.begin(), rms.end());
  const size_t decile = std::max((size_t)1, rms.size() / 10);
  double lo = 0.0, hi = 0.0;
  for (size_t i = 0; i < decile; ++i) {
    lo += rms[i];
    hi += rms[rms.size() - 1 - i];
  }
  lo /= decile;
  hi /= decile;
  if (hi <= 0.0) return 0.0;
  return (hi - lo) / (hi + lo + 1e-12);
}

double OfflineDnsmosScorer::score(const AudioClip& audio) {
  if (audio.empty()) throw EmptyAudioError("no samples");
  dsp::FeatureConfig cfg;
  cfg.sample_rate = audio.sample_rate;
  nn::Tensor feats = dsp::log_mel_frames(audio, cfg);
  // Flatness per frame: exp(mean log energy) / mean energy, in (0, 1].
  double flatness = 0.0;
  for (int r = 0; r < feats.rows(); ++r) {
    double log_sum = 0.0, lin_sum = 0.0;
    for (int c = 0; c < feats.cols(); ++c) {
      log_sum += feats.at(r, c);
      lin_sum += std::exp(feats.at(r, c));
    }
    const int n = feats.cols();
    flatness += std::exp(log_sum / n) / (lin_sum / n);
  }
  flatness /= feats.rows();
  return 1.0 + 4.0 * (1.0 - std::min(1.0, flatness));
}

}  // namespace clients
}  // namespace flespeech
