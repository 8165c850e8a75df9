// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#include "flespeech/nn/autograd.h"

#include <unordered_set>

#include "flespeech/common/error.h"

namespace flespeech {
namespace nn {

namespace {

void topo_visit(Node* n, std::unordered_set<Node*>* seen,
                std::vector<Node*>* order) {
  // Iterative DFS; graphs can be deep (one node per op per step).
  struct Frame {
    Node* node;
    std::size_t next_parent;
  };
  std::vector<Frame> stack;
  stack.push_back({n, 0});
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next_parent == 0) {
      if (seen->count(f.node)) {
        stack.pop_back();
        continue;
      }
      seen->insert(f.node);
    }
    if (f.next_parent < f.node->parents.size()) {
      Node* p = f.node->parents[f.next_parent++].get();
      if (!seen->count(p) && p->requires_grad) stack.push_back({p, 0});
    } else {
      order->push_back(f.node);
      stack.pop_back();
    }
  }
}

}  // namespace

void backward(const Var& loss) {
  if (!loss.defined()) throw Error("backward on undefined var");
  Node* root = loss.node();
  if (root->value.size() != 1) {
    throw Error("backward expects a scalar loss");
  }
  if (!root->requires_grad) return;

  std::unordered_set<Node*> seen;
  std::vector<Node*> order;
  topo_visit(root, &seen, &order);

  root->ensure_grad();
  root->grad.at(0) = 1.0;

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (!n->grad.defined()) continue;  // no gradient reached this node
    if (n->backward_fn) n->backward_fn(*n);
    if (n->grad_sink != nullptr) {
      Tensor& sink = *n->grad_sink;
      const double* g = n->grad.data();
      double* s = sink.data();
      for (std::int64_t i = 0; i < n->grad.size(); ++i) s[i] += g[i];
    }
  }
}

}  // namespace nn
}  // namespace flespeech
