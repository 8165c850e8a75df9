// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#include "flespeech/tokenizer/tokenizer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>

#include "flespeech/common/error.h"
#include "flespeech/common/rng.h"

namespace flespeech {
namespace tokenizer {

namespace {

double sq_dist(const double* a, const double* b, size_t d) {
  double s = 0.0;
  for (size_t i = 0; i < d; ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return s;
}

struct FlatFeatures {
  std::vector<double> data;  // [n, d] row-major
  size_t n = 0;
  size_t d = 0;

  const double* row(size_t i) const { return data.data() + i * d; }
};

FlatFeatures flatten(const std::vector<FeatureFrameSequence>& features) {
  FlatFeatures flat;
  for (const auto& seq : features) {
    if (seq.frames.size() == 0) continue;
    if (flat.d == 0) flat.d = (size_t)seq.frames.cols();
    if ((size_t)seq.frames.cols() != flat.d) {
      throw DimensionMismatchError("feature dimension varies across corpus");
    }
    flat.data.insert(flat.data.end(), seq.frames.vec().begin(),
                     seq.frames.vec().end());
    flat.n += (size_t)seq.frames.rows();
  }
  return flat;
}

void round_to_float32(nn::Tensor& t) {
  for (double& v : t.vec()) v = (double)(float)v;
}

}  // namespace

FeatureFrameSequence extract_features(const AudioClip& audio,
                                      const dsp::FeatureConfig& config) {
  FeatureFrameSequence seq;
  seq.frames = dsp::log_mel_frames(audio, config);
  seq.frame_rate_hz = config.frame_rate_hz();
  return seq;
}

KMeansCodebook fit_codebook(const std::vector<FeatureFrameSequence>& features,
                            int k, uint64_t seed, KMeansTrace* trace) {
  if (k < 1) throw TooFewFramesError("k must be at least 1");
  FlatFeatures flat = flatten(features);
  if (flat.n < (size_t)k) {
    throw TooFewFramesError("fewer frames than clusters");
  }
  Rng rng(seed);
  const size_t d = flat.d;

  // k-means++ seeding.
  std::vector<double> centroids((size_t)k * d);
  std::vector<double> best_d2(flat.n, std::numeric_limits<double>::max());
  size_t first = rng.uniform_int(flat.n);
  std::memcpy(centroids.data(), flat.row(first), d * sizeof(double));
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (size_t i = 0; i < flat.n; ++i) {
      const double d2 =
          sq_dist(flat.row(i), centroids.data() + (size_t)(c - 1) * d, d);
      if (d2 < best_d2[i]) best_d2[i] = d2;
      total += best_d2[i];
    }
    size_t pick = 0;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      double acc = 0.0;
      for (size_t i = 0; i < flat.n; ++i) {
        acc += best_d2[i];
        if (acc >= target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.uniform_int(flat.n);
    }
    std::memcpy(centroids.data() + (size_t)c * d, flat.row(pick),
                d * sizeof(double));
  }

  // Lloyd iterations.
  const int max_iters = 100;
  const double rel_tol = 1e-6;
  std::vector<int> assign(flat.n, 0);
  std::vector<double> sums((size_t)k * d);
  std::vector<size_t> counts((size_t)k);
  double prev_obj = std::numeric_limits<double>::max();
  for (int iter = 0; iter < max_iters; ++iter) {
    double obj = 0.0;
    for (size_t i = 0; i < flat.n; ++i) {
      int best = 0;
      double best_dist = std::numeric_limits<double>::max();
      for (int c = 0; c < k; ++c) {
        const double d2 =
            sq_dist(flat.row(i), centroids.data() + (size_t)c * d, d);
        if (d2 < best_dist) {
          best_dist = d2;
          best = c;
        }
      }
      assign[i] = best;
      obj += best_dist;
    }
    if (trace != nullptr) trace->objective.push_back(obj);

    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), (size_t)0);
    for (size_t i = 0; i < flat.n; ++i) {
      const double* x = flat.row(i);
      double* s = sums.data() + (size_t)assign[i] * d;
      for (size_t j = 0; j < d; ++j) s[j] += x[j];
      counts[(size_t)assign[i]]++;
    }
    for (int c = 0; c < k; ++c) {
      if (counts[(size_t)c] == 0) {
        // Reseed an empty cluster from the point farthest from its centroid.
        size_t far_i = 0;
        double far_d = -1.0;
        for (size_t i = 0; i < flat.n; ++i) {
          const double d2 = sq_dist(flat.row(i),
                                    centroids.data() + (size_t)assign[i] * d, d);
          if (d2 > far_d) {
            far_d = d2;
            far_i = i;
          }
        }
        std::memcpy(centroids.data() + (size_t)c * d, flat.row(far_i),
                    d * sizeof(double));
        continue;
      }
      for (size_t j = 0; j < d; ++j) {
        centroids[(size_t)c * d + j] =
            sums[(size_t)c * d + j] / counts[(size_t)c];
      }
    }
    if (prev_obj < std::numeric_limits<double>::max() &&
        std::abs(prev_obj - obj) <= rel_tol * std::max(prev_obj, 1e-300)) {
      break;
    }
    prev_obj = obj;
  }

  KMeansCodebook book;
  book.centroids = nn::Tensor::from_vector({k, (int)d}, std::move(centroids));
  round_to_float32(book.centroids);
  return book;
}

SemanticTokenSequence tokenize(const FeatureFrameSequence& features,
                               const KMeansCodebook& codebook) {
  if (features.frames.cols() != codebook.dim()) {
    throw DimensionMismatchError("feature dim does not match codebook");
  }
  const int t = features.frames.rows();
  const size_t d = (size_t)features.frames.cols();
  const int k = codebook.k();
  SemanticTokenSequence out;
  out.frame_rate_hz = features.frame_rate_hz;
  out.tokens.reserve((size_t)t);
  for (int i = 0; i < t; ++i) {
    const double* x = features.frames.data() + (size_t)i * d;
    int best = 0;
    double best_dist = std::numeric_limits<double>::max();
    for (int c = 0; c < k; ++c) {
      const double* cen = codebook.centroids.data() + (size_t)c * d;
      const double d2 = sq_dist(x, cen, d);
      if (d2 < best_dist) {
        best_dist = d2;
        best = c;
      }
    }
    out.tokens.push_back(best);
  }
  return out;
}

void save_codebook(const std::string& path, const KMeansCodebook& codebook) {
  const std::string tmp = path + ".tmp";
  std::FILE* f = std::fopen(tmp.c_str(), "wb");
  if (f == nullptr) throw IoError("cannot open " + tmp);
  const char magic[4] = {'F', 'L', 'C', 'B'};
  const uint32_t version = 1;
  const uint32_t k = (uint32_t)codebook.k();
  const uint32_t d = (uint32_t)codebook.dim();
  std::fwrite(magic, 1, 4, f);
  std::fwrite(&version, sizeof(version), 1, f);
  std::fwrite(&k, sizeof(k), 1, f);
  std::fwrite(&d, sizeof(d), 1, f);
  std::vector<float> row((size_t)d);
  for (uint32_t c = 0; c < k; ++c) {
    for (uint32_t j = 0; j < d; ++j) {
      row[j] = (float)codebook.centroids.at((int)c, (int)j);
    }
    std::fwrite(row.data(), sizeof(float), d, f);
  }
  if (std::fclose(f) != 0) throw IoError("write failed for " + tmp);
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw IoError("rename failed for " + path);
  }
}

KMeansCodebook load_codebook(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (f == nullptr) throw IoError("cannot open " + path);
  char magic[4];
  uint32_t version = 0, k = 0, d = 0;
  bool ok = std::fread(magic, 1, 4, f) == 4 &&
            std::fread(&version, sizeof(version), 1, f) == 1 &&
            std::fread(&k, sizeof(k), 1, f) == 1 &&
            std::fread(&d, sizeof(d), 1, f) == 1;
  if (!ok || std::memcmp(magic, "FLCB", 4) != 0 || version != 1 || k == 0 ||
      d == 0) {
    std::fclose(f);
    throw IoError("not a codebook file: " + path);
  }
  KMeansCodebook book;
  book.centroids = nn::Tensor::zeros({(int)k, (int)d});
  std::vector<float> row((size_t)d);
  for (uint32_t c = 0; c < k; ++c) {
    if (std::fread(row.data(), sizeof(float), d, f) != d) {
      std::fclose(f);
      throw IoError("truncated codebook file: " + path);
    }
    for (uint32_t j = 0; j < d; ++j) {
      book.centroids.at((int)c, (int)j) = row[j];
    }
  }
  std::fclose(f);
  return book;
}

}  // namespace tokenizer
}  // namespace flespeech
