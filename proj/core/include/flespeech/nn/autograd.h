// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#ifndef FLESPEECH_NN_AUTOGRAD_H_
#define FLESPEECH_NN_AUTOGRAD_H_

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "flespeech/nn/tensor.h"

namespace flespeech {
namespace nn {

// Define-by-run reverse-mode autodiff over Tensor. Each op allocates a Node
// whose backward closure scatters the node's gradient into its parents.

struct Node {
  Tensor value;
  Tensor grad;  // allocated lazily by backward()
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;
  Tensor* grad_sink = nullptr;  // external accumulator (parameters)

  void ensure_grad() {
    if (!grad.defined()) grad = Tensor::zeros(value.shape());
  }
};

class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node> n) : node_(std::move(n)) {}

  // Constant input; no gradient flows into it.
  static Var constant(Tensor v) {
    auto n = std::make_shared<Node>();
    n->value = std::move(v);
    return Var(std::move(n));
  }

  // Trainable leaf; gradient accumulates into *sink if given.
  static Var leaf(Tensor v, Tensor* sink = nullptr) {
    auto n = std::make_shared<Node>();
    n->value = std::move(v);
    n->requires_grad = true;
    n->grad_sink = sink;
    return Var(std::move(n));
  }

  bool defined() const { return node_ != nullptr; }
  const Tensor& value() const { return node_->value; }
  const Tensor& grad() const { return node_->grad; }
  bool requires_grad() const { return node_->requires_grad; }
  Node* node() const { return node_.get(); }
  const std::shared_ptr<Node>& ptr() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

// Runs reverse-mode accumulation from a scalar loss. Seeds d(loss)/d(loss)=1,
// visits nodes in reverse topological order, and adds each leaf gradient into
// its grad_sink when one is attached.
void backward(const Var& loss);

}  // namespace nn
}  // namespace flespeech

#endif  // FLESPEECH_NN_AUTOGRAD_H_
