// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#ifndef FLESPEECH_EVAL_EVAL_H_
#define FLESPEECH_EVAL_EVAL_H_

#include <map>
#include <string>
#include <vector>

#include "flespeech/data/manifest.h"
#include "flespeech/mpe/mpe.h"
#include "flespeech/nn/tensor.h"

namespace flespeech {
namespace eval {

// Cosine similarity. Throws DimensionMismatch on unequal sizes and ZeroNorm
// when either vector has zero norm.
double speaker_similarity(const nn::Tensor& a, const nn::Tensor& b);

struct SimilarityMatrix {
  nn::Tensor matrix;  // [N, M], entries in [-1, 1]
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  // mean(diagonal) - mean(off-diagonal), over the leading square block
  double diagonal_dominance = 0.0;
};

// Pairwise cosine matrix of synth rows against reference columns. Throws
// EmptyInput when either set is empty.
SimilarityMatrix build_similarity_matrix(
    const std::vector<nn::Tensor>& synth_embeddings,
    const std::vector<nn::Tensor>& reference_embeddings,
    const std::vector<std::string>& row_labels = {},
    const std::vector<std::string>& col_labels = {});

struct AttributeAccuracyReport {
  std::map<std::string, double> accuracy;  // pitch / rms / speech_rate
  int clips = 0;
};

// Re-extracts attributes from each labeled entry's audio through the same
// extraction code the dataset pipeline uses, re-labels against bounds
// computed over the synthesized set, and scores agreement with the target
// labels. Throws EmptyManifest when no entry carries a target label.
AttributeAccuracyReport attribute_accuracy(
    const std::vector<data::ManifestEntry>& entries);

// Fraction of entry pairs with different target categories for `attribute`
// whose re-extracted raw values are ordered consistently with the targets
// (high > normal > low). Throws EmptyManifest / TooFewValues.
double ordering_accuracy(const std::vector<data::ManifestEntry>& entries,
                         const std::string& attribute);

void write_similarity_csv(const SimilarityMatrix& m, const std::string& path);
// Grayscale heatmap, one 8x8 block per cell, similarity -1 -> black,
// +1 -> white.
void write_similarity_heatmap(const SimilarityMatrix& m,
                              const std::string& path);
void write_accuracy_json(const AttributeAccuracyReport& report,
                         double diagonal_dominance, const std::string& path);

struct EvalConfig {
  std::string synth_manifest;
  std::string ref_manifest;
  std::string out_dir;
};

struct EvalSummary {
  double diagonal_dominance = 0.0;
  std::map<std::string, double> attribute_accuracy;
  int synth_clips = 0;
  int ref_clips = 0;
};

// Full desk-scale report: speaker embeddings from the given reference
// encoder, similarity matrix CSV + heatmap, attribute accuracy JSON.
EvalSummary run_evaluation(const EvalConfig& cfg,
                           const mpe::MPEModel& speaker_encoder);

}  // namespace eval
}  // namespace flespeech

#endif  // FLESPEECH_EVAL_EVAL_H_
