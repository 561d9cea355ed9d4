#include "qsat/tensor.hpp"

#include <algorithm>
#include <unordered_set>

namespace qsat {

namespace {
thread_local int no_grad_depth = 0;
}

NoGradGuard::NoGradGuard() { ++no_grad_depth; }
NoGradGuard::~NoGradGuard() { --no_grad_depth; }
bool grad_disabled() { return no_grad_depth > 0; }

Tensor Tensor::zeros(int rows, int cols) { return full(rows, cols, 0.0f); }

Tensor Tensor::full(int rows, int cols, float value) {
  if (rows < 0 || cols < 0) throw ShapeError("negative tensor dimension");
  auto n = std::make_shared<Node>();
  n->rows = rows;
  n->cols = cols;
  n->data.assign(static_cast<std::size_t>(rows) * cols, value);
  return Tensor(std::move(n));
}

Tensor Tensor::from_mat(const MatF& m) {
  auto n = std::make_shared<Node>();
  n->rows = m.rows;
  n->cols = m.cols;
  n->data = m.v;
  return Tensor(std::move(n));
}

Tensor Tensor::leaf(int rows, int cols, bool requires_grad) {
  Tensor t = zeros(rows, cols);
  t.node()->requires_grad = requires_grad;
  return t;
}

void backward(const Tensor& loss) {
  if (!loss.defined()) throw ShapeError("backward on undefined tensor");
  Node* root = loss.node();
  if (root->size() != 1) throw ShapeError("backward requires a scalar loss");

  // Iterative post-order DFS: topological order with children before parents.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(root, 0);
  seen.insert(root);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root->ensure_grad();
  root->grad[0] += 1.0f;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (!node->backward_fn || node->grad.empty()) continue;
    for (auto& p : node->parents) {
      if (p->requires_grad) p->ensure_grad();
    }
    node->backward_fn(*node);
  }
}

}  // namespace qsat
