// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#include "flespeech/nn/optim.h"

#include <cmath>

#include "flespeech/nn/serialize.h"

namespace flespeech {
namespace nn {

void AdamW::step(ParamStore& ps, double lr,
                 const std::vector<std::string>& only_names) {
  if (lr < 0.0) lr = cfg_.lr;
  ++step_;
  double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
  double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));

  std::vector<std::string> names =
      only_names.empty() ? ps.names() : only_names;
  for (const auto& name : names) {
    Tensor& theta = ps.value(name);
    const Tensor& g = ps.grad(name);
    auto mit = m_.find(name);
    if (mit == m_.end()) {
      mit = m_.emplace(name, Tensor(theta.shape())).first;
      v_.emplace(name, Tensor(theta.shape()));
    }
    Tensor& m = mit->second;
    Tensor& v = v_.at(name);
    for (std::int64_t i = 0; i < theta.size(); ++i) {
      double gi = g.data()[i];
      m.data()[i] = cfg_.beta1 * m.data()[i] + (1.0 - cfg_.beta1) * gi;
      v.data()[i] = cfg_.beta2 * v.data()[i] + (1.0 - cfg_.beta2) * gi * gi;
      double mhat = m.data()[i] / bc1;
      double vhat = v.data()[i] / bc2;
      theta.data()[i] -= lr * (mhat / (std::sqrt(vhat) + cfg_.eps) +
                               cfg_.weight_decay * theta.data()[i]);
    }
  }
}

void AdamW::save(const std::string& path) const {
  std::map<std::string, Tensor> state;
  for (const auto& [name, t] : m_) state["m/" + name] = t;
  for (const auto& [name, t] : v_) state["v/" + name] = t;
  state["__step__"] = Tensor::scalar(static_cast<double>(step_));
  save_tensor_map(path, state);
}

void AdamW::load(const std::string& path) {
  auto state = load_tensor_map(path);
  m_.clear();
  v_.clear();
  step_ = 0;
  for (auto& [name, t] : state) {
    if (name == "__step__") {
      step_ = static_cast<std::int64_t>(t.at(0));
    } else if (name.rfind("m/", 0) == 0) {
      m_.emplace(name.substr(2), std::move(t));
    } else if (name.rfind("v/", 0) == 0) {
      v_.emplace(name.substr(2), std::move(t));
    }
  }
}

}  // namespace nn
}  // namespace flespeech
