#pragma once

#include <span>
#include <string>
#include <vector>

#include "qsat/rng.hpp"
#include "qsat/tensor.hpp"

namespace qsat {

// Named handle to a trainable tensor. The tensor is shared with the module
// that owns it; optimizers and checkpoints address it by name path.
struct Parameter {
  std::string name;  // e.g. "mlp_q.layer0.weight"
  Tensor tensor;
  bool trainable = true;
};

// Dense MLP: widths [in, h..., out], LeakyReLU on hidden layers, linear
// output. Weights Glorot-uniform from the given stream, biases zero.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::span<const int> widths, Rng& rng, float slope = 0.01f);

  Tensor forward(const Tensor& x) const;
  // Appends parameters as prefix.layerK.weight / prefix.layerK.bias.
  void collect(const std::string& prefix, std::vector<Parameter>& out) const;

  int in_dim() const { return in_dim_; }
  int out_dim() const { return out_dim_; }

 private:
  std::vector<Tensor> weights_;  // layer k: widths[k] x widths[k+1]
  std::vector<Tensor> biases_;   // 1 x widths[k+1]
  float slope_ = 0.01f;
  int in_dim_ = 0;
  int out_dim_ = 0;
};

// Fills a leaf tensor with Glorot-uniform values, bound sqrt(6/(fan_in+fan_out)).
void glorot_uniform(Tensor& w, Rng& rng);

}  // namespace qsat
