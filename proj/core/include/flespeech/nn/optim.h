// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#ifndef FLESPEECH_NN_OPTIM_H_
#define FLESPEECH_NN_OPTIM_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "flespeech/nn/params.h"

namespace flespeech {
namespace nn {

struct AdamWConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

// AdamW with per-parameter moment state. An optional name filter restricts
// the update to a parameter subset (used for stage-wise freezing).
class AdamW {
 public:
  explicit AdamW(AdamWConfig cfg = {}) : cfg_(cfg) {}

  const AdamWConfig& config() const { return cfg_; }
  std::int64_t step_count() const { return step_; }

  // Applies one update from the accumulated gradients. lr < 0 means "use
  // the configured rate". Gradients are not cleared.
  void step(ParamStore& ps, double lr = -1.0,
            const std::vector<std::string>& only_names = {});

  void save(const std::string& path) const;
  void load(const std::string& path);

 private:
  AdamWConfig cfg_;
  std::int64_t step_ = 0;
  std::map<std::string, Tensor> m_;
  std::map<std::string, Tensor> v_;
};

}  // namespace nn
}  // namespace flespeech

#endif  // FLESPEECH_NN_OPTIM_H_
