#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "qsat/error.hpp"
#include "qsat/mat.hpp"

namespace qsat {

// One tape entry of the reverse-mode graph. All tensors are 2-D (a scalar is
// 1x1, a bias row is 1xd); data is float32, long reductions accumulate in
// double inside the op kernels.
struct Node {
  int rows = 0;
  int cols = 0;
  std::vector<float> data;
  std::vector<float> grad;  // empty until backward reaches this node
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this node's grad, accumulates (+=) into each parent's grad.
  std::function<void(Node&)> backward_fn;

  std::size_t size() const { return static_cast<std::size_t>(rows) * cols; }
  float& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  float at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  void ensure_grad() {
    if (grad.empty()) grad.assign(size(), 0.0f);
  }
};

// Shared handle to a Node; cheap to copy, keeps the graph alive.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node> n) : node_(std::move(n)) {}

  static Tensor zeros(int rows, int cols);
  static Tensor full(int rows, int cols, float value);
  static Tensor scalar(float value) { return full(1, 1, value); }
  static Tensor from_mat(const MatF& m);
  // Leaf that participates in differentiation (parameters).
  static Tensor leaf(int rows, int cols, bool requires_grad);

  bool defined() const { return node_ != nullptr; }
  Node* node() const { return node_.get(); }
  const std::shared_ptr<Node>& handle() const { return node_; }

  int rows() const { return node_->rows; }
  int cols() const { return node_->cols; }
  std::size_t size() const { return node_->size(); }
  std::vector<float>& data() { return node_->data; }
  const std::vector<float>& data() const { return node_->data; }
  const std::vector<float>& grad() const { return node_->grad; }
  float at(int r, int c) const { return node_->at(r, c); }

  // Value of a 1x1 tensor.
  float item() const {
    if (node_->size() != 1) throw ShapeError("item() requires a 1x1 tensor");
    return node_->data[0];
  }

  MatF to_mat() const {
    MatF m(node_->rows, node_->cols);
    m.v = node_->data;
    return m;
  }

  void zero_grad() {
    if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0f);
  }

 private:
  std::shared_ptr<Node> node_;
};

// Runs reverse-mode accumulation from a scalar loss. Parameters not reached
// by the graph simply keep zero (or absent) gradients. Gradients accumulate
// across calls; callers zero them between steps.
void backward(const Tensor& loss);

// While alive, newly created ops record no tape (pure forward evaluation).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;
};

// True when inside a NoGradGuard scope.
bool grad_disabled();

}  // namespace qsat
