// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#ifndef FLESPEECH_TOKENIZER_TOKENIZER_H_
#define FLESPEECH_TOKENIZER_TOKENIZER_H_

#include <cstdint>
#include <string>
#include <vector>

#include "flespeech/audio/audio_clip.h"
#include "flespeech/dsp/filterbank.h"
#include "flespeech/nn/tensor.h"

namespace flespeech {
namespace tokenizer {

struct FeatureFrameSequence {
  nn::Tensor frames;  // [T_feat, D_feat]
  double frame_rate_hz = 0.0;
};

struct KMeansCodebook {
  nn::Tensor centroids;  // [K, D_feat]

  int k() const { return (int)centroids.rows(); }
  int dim() const { return (int)centroids.cols(); }
};

struct SemanticTokenSequence {
  std::vector<int> tokens;  // each in [0, K)
  double frame_rate_hz = 0.0;
};

// Per-iteration sum of squared distances to the nearest centroid; callers
// can assert the trace is non-increasing.
struct KMeansTrace {
  std::vector<double> objective;
};

FeatureFrameSequence extract_features(const AudioClip& audio,
                                      const dsp::FeatureConfig& config);

// Lloyd's algorithm with k-means++ seeding. Empty clusters are reseeded from
// the point farthest from its assigned centroid. Centroids are rounded to
// float32 precision so a saved codebook reproduces in-memory tokenization.
KMeansCodebook fit_codebook(const std::vector<FeatureFrameSequence>& features,
                            int k, uint64_t seed,
                            KMeansTrace* trace = nullptr);

// Nearest centroid by squared distance; ties go to the lowest index.
SemanticTokenSequence tokenize(const FeatureFrameSequence& features,
                               const KMeansCodebook& codebook);

// Binary layout: magic "FLCB", u32 version, u32 K, u32 D, then K*D
// little-endian float32 centroid values in row-major order.
void save_codebook(const std::string& path, const KMeansCodebook& codebook);
KMeansCodebook load_codebook(const std::string& path);

}  // namespace tokenizer
}  // namespace flespeech

#endif  // FLESPEECH_TOKENIZER_TOKENIZER_H_
