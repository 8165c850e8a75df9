// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#include "flespeech/nn/params.h"

#include "flespeech/common/error.h"
#include "flespeech/common/hash.h"
#include "flespeech/nn/serialize.h"

namespace flespeech {
namespace nn {

Tensor& ParamStore::create(const std::string& name, std::vector<int> shape) {
  if (values_.count(name)) throw Error("parameter already exists: " + name);
  auto [it, ok] = values_.emplace(name, Tensor(shape));
  (void)ok;
  grads_.emplace(name, Tensor(std::move(shape)));
  return it->second;
}

Tensor& ParamStore::create_gaussian(const std::string& name,
                                    std::vector<int> shape, Rng& rng,
                                    double stddev) {
  Tensor& t = create(name, std::move(shape));
  for (std::int64_t i = 0; i < t.size(); ++i) {
    t.data()[i] = rng.gaussian(0.0, stddev);
  }
  return t;
}

Tensor& ParamStore::create_full(const std::string& name,
                                std::vector<int> shape, double value) {
  Tensor& t = create(name, std::move(shape));
  t.fill(value);
  return t;
}

Tensor& ParamStore::value(const std::string& name) {
  auto it = values_.find(name);
  if (it == values_.end()) throw Error("unknown parameter: " + name);
  return it->second;
}

const Tensor& ParamStore::value(const std::string& name) const {
  auto it = values_.find(name);
  if (it == values_.end()) throw Error("unknown parameter: " + name);
  return it->second;
}

Tensor& ParamStore::grad(const std::string& name) {
  auto it = grads_.find(name);
  if (it == grads_.end()) throw Error("unknown parameter: " + name);
  return it->second;
}

void ParamStore::zero_grads() {
  for (auto& [name, g] : grads_) g.fill(0.0);
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(values_.size());
  for (const auto& [name, t] : values_) out.push_back(name);
  return out;
}

std::vector<std::string> ParamStore::names_with_prefix(
    const std::string& prefix) const {
  std::vector<std::string> out;
  for (const auto& [name, t] : values_) {
    if (name.rfind(prefix, 0) == 0) out.push_back(name);
  }
  return out;
}

std::size_t ParamStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : values_) n += static_cast<std::size_t>(t.size());
  return n;
}

std::uint64_t ParamStore::content_hash() const {
  return content_hash_prefix("");
}

std::uint64_t ParamStore::content_hash_prefix(const std::string& prefix) const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& [name, t] : values_) {
    if (name.rfind(prefix, 0) != 0) continue;
    h = fnv1a64(name, h);
    h = fnv1a64(t.data(), static_cast<std::size_t>(t.size()) * sizeof(double), h);
  }
  return h;
}

void ParamStore::save(const std::string& path) const {
  save_tensor_map(path, values_);
}

void ParamStore::load(const std::string& path) {
  values_ = load_tensor_map(path);
  grads_.clear();
  for (const auto& [name, t] : values_) grads_.emplace(name, Tensor(t.shape()));
}

Var use_param(ParamStore& ps, const std::string& name) {
  return Var::leaf(ps.value(name), &ps.grad(name));
}

Var use_frozen(const ParamStore& ps, const std::string& name) {
  return Var::constant(ps.value(name));
}

}  // namespace nn
}  // namespace flespeech
