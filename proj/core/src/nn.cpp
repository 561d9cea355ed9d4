#include "qsat/nn.hpp"

#include <cmath>

#include "qsat/ops.hpp"

namespace qsat {

void glorot_uniform(Tensor& w, Rng& rng) {
  double bound = std::sqrt(6.0 / (w.rows() + w.cols()));
  for (float& v : w.data()) v = static_cast<float>((2.0 * rng.uniform() - 1.0) * bound);
}

Mlp::Mlp(std::span<const int> widths, Rng& rng, float slope) : slope_(slope) {
  if (widths.size() < 2) throw ConfigError("mlp needs at least one layer");
  for (int w : widths) {
    if (w <= 0) throw ConfigError("mlp widths must be positive");
  }
  in_dim_ = widths.front();
  out_dim_ = widths.back();
  for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
    Tensor w = Tensor::leaf(widths[k], widths[k + 1], true);
    glorot_uniform(w, rng);
    weights_.push_back(w);
    biases_.push_back(Tensor::leaf(1, widths[k + 1], true));
  }
}

Tensor Mlp::forward(const Tensor& x) const {
  if (x.cols() != in_dim_)
    throw ShapeError("mlp expects " + std::to_string(in_dim_) + " input columns, got " +
                     std::to_string(x.cols()));
  Tensor h = x;
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    h = ops::add_bias(ops::matmul(h, weights_[k]), biases_[k]);
    if (k + 1 < weights_.size()) h = ops::leaky_relu(h, slope_);
  }
  return h;
}

void Mlp::collect(const std::string& prefix, std::vector<Parameter>& out) const {
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    std::string layer = prefix + ".layer" + std::to_string(k);
    out.push_back({layer + ".weight", weights_[k], true});
    out.push_back({layer + ".bias", biases_[k], true});
  }
}

}  // namespace qsat
