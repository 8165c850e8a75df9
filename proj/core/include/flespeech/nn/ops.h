// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#ifndef FLESPEECH_NN_OPS_H_
#define FLESPEECH_NN_OPS_H_

#include <vector>

#include "flespeech/nn/autograd.h"

namespace flespeech {
namespace nn {

// Elementwise.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var add_scalar(const Var& a, double s);
Var relu(const Var& a);
Var gelu(const Var& a);
Var tanh_op(const Var& a);
Var sigmoid(const Var& a);
Var exp_op(const Var& a);
Var log_op(const Var& a);  // natural log; caller guarantees positivity
Var square(const Var& a);
Var abs_op(const Var& a);

// Linear algebra. Rank-2 operands.
Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);

// [T, D] + [D] broadcast over rows.
Var add_rowvec(const Var& m, const Var& v);
// Tile a [1, D] row T times -> [T, D].
Var tile_rows(const Var& row, int t);

// Embedding lookup: rows of table [V, D] selected by ids -> [n, D].
Var gather_rows(const Var& table, const std::vector<int>& ids);

// Structure.
Var concat_cols(const std::vector<Var>& parts);
Var slice_cols(const Var& a, int lo, int hi);
Var concat_rows(const std::vector<Var>& parts);
Var slice_rows(const Var& a, int lo, int hi);
Var reshape(const Var& a, std::vector<int> shape);

// Overlapping frames of a rank-1 signal [n] -> [t, win]; frame i starts at
// i*hop, positions beyond n read as zero.
Var frame_signal(const Var& x, int win, int hop, int t);

// Row-wise normalization / activation.
Var softmax_rows(const Var& a);
Var layer_norm_rows(const Var& a, const Var& gain, const Var& bias,
                    double eps = 1e-5);

// Reductions and losses (scalar outputs).
Var sum_all(const Var& a);
Var mean_all(const Var& a);
Var mean_rows(const Var& a);  // [T, D] -> [1, D]
Var mse_loss(const Var& pred, const Var& target);
Var l1_loss(const Var& pred, const Var& target);

// Mean cross-entropy of logits [T, V] against target ids; rows with
// weight 0 are excluded from the mean.
Var cross_entropy_mean(const Var& logits, const std::vector<int>& targets,
                       const std::vector<double>& row_weights = {});

}  // namespace nn
}  // namespace flespeech

#endif  // FLESPEECH_NN_OPS_H_
