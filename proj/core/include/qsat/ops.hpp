#pragma once

#include <span>
#include <vector>

#include "qsat/graph.hpp"
#include "qsat/loss.hpp"
#include "qsat/tensor.hpp"

namespace qsat::ops {

Tensor add(const Tensor& a, const Tensor& b);       // same shape
Tensor add_bias(const Tensor& x, const Tensor& b);  // b is 1xC, broadcast over rows
Tensor mul(const Tensor& a, const Tensor& b);       // elementwise
Tensor scale(const Tensor& x, float c);
Tensor matmul(const Tensor& a, const Tensor& b);

// Product against a 0/1 sparsity pattern: a·x, or aᵀ·x when transpose is
// set. The backward pass scatters through the same pattern.
Tensor sparse_matmul(const SparseMat& a, const Tensor& x, bool transpose = false);

Tensor sigmoid(const Tensor& x);
Tensor leaky_relu(const Tensor& x, float slope = 0.01f);
// log(max(x, eps)); the backward reciprocal is clamped the same way, so
// gradient keeps flowing below the floor.
Tensor clamped_log(const Tensor& x, float eps);

Tensor sum(const Tensor& x);   // 1x1
Tensor mean(const Tensor& x);  // 1x1

Tensor concat_cols(std::span<const Tensor> parts);
Tensor concat_rows(const Tensor& a, const Tensor& b);
Tensor slice_rows(const Tensor& x, int r0, int r1);  // rows [r0, r1)

// Segmented PairNorm (PN variant, s=1, eps 1e-5), each segment normalized
// independently: rows [offsets[k], offsets[k+1]) form segment k. Centers
// columns to zero mean, then scales so the mean squared row norm is d.
Tensor pairnorm(const Tensor& x, std::span<const std::int32_t> offsets);

// PairNorm over arbitrary row groupings: seg_of_row[r] in [0, num_segs)
// names the segment each row belongs to. Used for literal states, whose
// per-instance rows are split across the positive and negative halves.
Tensor pairnorm_by_row(const Tensor& x, std::span<const std::int32_t> seg_of_row, int num_segs);

// Forward identity (bit-for-bit); backward multiplies incoming gradient by
// (1 - alpha).
Tensor grad_scale(const Tensor& x, float alpha);
Tensor stop_gradient(const Tensor& x);

// Per-clause unsatisfiedness of fractional assignments q (n x u) -> m x u.
Tensor clause_values(const FactorGraph& g, const Tensor& q);

// Per-instance, per-column sum of -log(max(value, eps)) over each instance's
// clause rows -> count x u.
Tensor segment_log_loss(const Tensor& values, std::span<const std::int32_t> clause_offsets);

// Rank-weighted multi-assignment reduction over per-instance column losses
// (count x u): within each row, columns sorted by loss descending get weights
// 1^2 ... u^2 (largest loss weighted least), normalized by their sum; rows
// with mask[b] != 0 contribute nothing. Returns the 1x1 sum over rows.
Tensor multi_assignment_loss(const Tensor& column_losses, std::span<const std::uint8_t> mask);

}  // namespace qsat::ops
