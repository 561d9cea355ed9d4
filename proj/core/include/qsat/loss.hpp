#pragma once

#include <span>
#include <vector>

#include "qsat/cnf.hpp"
#include "qsat/graph.hpp"
#include "qsat/mat.hpp"

namespace qsat {

// Floor applied inside log and reciprocal so falsified clauses keep a large
// but finite loss and gradient in single precision.
inline constexpr double kLossEps = 1e-6;

enum class GradMode {
  kClauseSum,  // d(sum_c V_c)/dx
  kLog,        // d(-sum_c log max(V_c, eps))/dx
};

// ---- Reference path: one formula, one assignment, double precision. ----

// V_c(x) = 1 - prod_{i in c+}(1 - x_i) * prod_{i in c-} x_i.
// Equals 1 iff a binary x satisfies the clause, 0 iff it falsifies it.
double clause_value(const CnfFormula& f, std::span<const double> x, std::int32_t clause);

std::vector<double> clause_values(const CnfFormula& f, std::span<const double> x);

// Product of all clause values; in [0,1], 1 exactly at satisfying binary x.
double formula_value(const CnfFormula& f, std::span<const double> x);

// -sum_c log(max(V_c, eps)). Zero iff every clause value is 1.
double log_loss(const CnfFormula& f, std::span<const double> x);

// Analytic gradient. The per-clause partial dV_c/dx_i is +P for positive
// literals and -P for negated ones, where P is the clause's falsity product
// with the i-th factor left out; P is recomputed by multiplying the
// remaining factors, never by dividing out a possibly-zero factor.
std::vector<double> loss_gradient(const CnfFormula& f, std::span<const double> x, GradMode mode);

struct MultiAssignmentLoss {
  double loss = 0.0;       // rank-weighted mean of the column log-losses
  std::int32_t best = 0;   // argmin column, ties to the lowest index
  std::vector<double> column_losses;
};

// Per-column log-loss of an n x u matrix of candidate assignments, weighted
// by squared rank: losses sorted descending get weights 1^2..u^2, and the
// weighted sum is divided by sum of squared indices. The lowest-loss column
// is the one promoted as the model output.
MultiAssignmentLoss multi_assignment_loss(const CnfFormula& f, const MatF& outputs);
MultiAssignmentLoss multi_assignment_loss(std::span<const double> column_losses);

// ---- Batched path: factor graph, n x d query matrix, float32 data. ----

// Column j of the result is the clause-value vector of query column j.
// Works on a single formula's graph or a batched disjoint union; products
// accumulate in double and reduce in clause-literal order, so a batched
// evaluation is bit-identical to per-instance evaluation.
MatF per_clause_losses(const FactorGraph& g, const MatF& q);

// n x d gradient of the chosen objective w.r.t. the query matrix, one
// independent column per query column. `values` must be the matching
// per_clause_losses result when mode == kLog; it is ignored for kClauseSum.
MatF loss_gradient(const FactorGraph& g, const MatF& q, GradMode mode,
                   const MatF* values = nullptr);

// Backward kernel shared by loss_gradient and the autodiff clause-value op:
// accumulates upstream[c,j] * dV_c/dq[i,j] into grad_out (n x d).
void clause_value_backward(const FactorGraph& g, const MatF& q, const MatF& upstream,
                           MatF& grad_out);

// Per-instance, per-column log-loss: out[k,j] = -sum over instance k's
// clauses of log(max(V[c,j], eps)). `values` is m x d for the whole batch.
MatF segment_log_loss(const MatF& values, std::span<const std::int32_t> clause_offsets);

}  // namespace qsat
