// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#ifndef FLESPEECH_NN_SERIALIZE_H_
#define FLESPEECH_NN_SERIALIZE_H_

#include <map>
#include <string>

#include "flespeech/nn/tensor.h"

namespace flespeech {
namespace nn {

// Binary container for named double tensors. Little-endian, written
// atomically (temp file + rename).
void save_tensor_map(const std::string& path,
                     const std::map<std::string, Tensor>& tensors);
std::map<std::string, Tensor> load_tensor_map(const std::string& path);

}  // namespace nn
}  // namespace flespeech

#endif  // FLESPEECH_NN_SERIALIZE_H_
