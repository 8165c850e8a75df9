// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#ifndef FLESPEECH_NN_PARAMS_H_
#define FLESPEECH_NN_PARAMS_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "flespeech/common/rng.h"
#include "flespeech/nn/autograd.h"
#include "flespeech/nn/tensor.h"

namespace flespeech {
namespace nn {

// Named parameter tensors with matching gradient accumulators. Iteration is
// name-ordered everywhere, which keeps hashing and optimizer updates
// deterministic.
class ParamStore {
 public:
  Tensor& create(const std::string& name, std::vector<int> shape);
  Tensor& create_gaussian(const std::string& name, std::vector<int> shape,
                          Rng& rng, double stddev);
  Tensor& create_full(const std::string& name, std::vector<int> shape,
                      double value);

  bool has(const std::string& name) const { return values_.count(name) > 0; }
  Tensor& value(const std::string& name);
  const Tensor& value(const std::string& name) const;
  Tensor& grad(const std::string& name);

  void zero_grads();
  std::vector<std::string> names() const;
  std::vector<std::string> names_with_prefix(const std::string& prefix) const;
  std::size_t parameter_count() const;

  // Order- and content-sensitive hash of all parameter values.
  std::uint64_t content_hash() const;
  std::uint64_t content_hash_prefix(const std::string& prefix) const;

  const std::map<std::string, Tensor>& values() const { return values_; }
  std::map<std::string, Tensor>& mutable_values() { return values_; }

  void save(const std::string& path) const;
  void load(const std::string& path);

 private:
  std::map<std::string, Tensor> values_;
  std::map<std::string, Tensor> grads_;
};

// Trainable view of a parameter: gradients accumulate into ps.grad(name).
Var use_param(ParamStore& ps, const std::string& name);

// Frozen view: a constant in the graph; gradient can still flow *through*
// downstream ops into other inputs, but never into this tensor.
Var use_frozen(const ParamStore& ps, const std::string& name);

// Convenience selector used by model code so the same forward function can
// run in trainable and frozen mode.
struct ParamCtx {
  ParamStore* ps;
  bool frozen = false;
  Var operator()(const std::string& name) const {
    return frozen ? use_frozen(*ps, name) : use_param(*ps, name);
  }
};

}  // namespace nn
}  // namespace flespeech

#endif  // FLESPEECH_NN_PARAMS_H_
