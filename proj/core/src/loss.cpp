#include "qsat/loss.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qsat/error.hpp"

namespace qsat {

namespace {

inline double falsity_factor(double xv, bool negated) {
  return negated ? xv : 1.0 - xv;
}

void require_assignment(const CnfFormula& f, std::size_t len) {
  if (len != static_cast<std::size_t>(f.num_vars))
    throw ShapeError("assignment length " + std::to_string(len) +
                     " does not match variable count " + std::to_string(f.num_vars));
}

}  // namespace

double clause_value(const CnfFormula& f, std::span<const double> x, std::int32_t clause) {
  require_assignment(f, x.size());
  if (clause < 0 || clause >= f.num_clauses())
    throw ShapeError("clause index " + std::to_string(clause) + " out of range");
  double prod = 1.0;
  for (Lit l : f.clauses[static_cast<std::size_t>(clause)])
    prod *= falsity_factor(x[static_cast<std::size_t>(lit_var(l)) - 1], lit_negated(l));
  return 1.0 - prod;
}

std::vector<double> clause_values(const CnfFormula& f, std::span<const double> x) {
  std::vector<double> out(static_cast<std::size_t>(f.num_clauses()));
  for (std::int32_t c = 0; c < f.num_clauses(); ++c) out[static_cast<std::size_t>(c)] = clause_value(f, x, c);
  return out;
}

double formula_value(const CnfFormula& f, std::span<const double> x) {
  double prod = 1.0;
  for (std::int32_t c = 0; c < f.num_clauses(); ++c) prod *= clause_value(f, x, c);
  return prod;
}

double log_loss(const CnfFormula& f, std::span<const double> x) {
  double total = 0.0;
  for (std::int32_t c = 0; c < f.num_clauses(); ++c)
    total -= std::log(std::max(clause_value(f, x, c), kLossEps));
  return total;
}

std::vector<double> loss_gradient(const CnfFormula& f, std::span<const double> x, GradMode mode) {
  require_assignment(f, x.size());
  std::vector<double> grad(x.size(), 0.0);
  std::vector<double> factors;
  for (const auto& clause : f.clauses) {
    const std::size_t w = clause.size();
    factors.resize(w);
    double prod = 1.0;
    for (std::size_t i = 0; i < w; ++i) {
      factors[i] = falsity_factor(x[static_cast<std::size_t>(lit_var(clause[i])) - 1],
                                  lit_negated(clause[i]));
      prod *= factors[i];
    }
    const double coeff =
        mode == GradMode::kClauseSum ? 1.0 : -1.0 / std::max(1.0 - prod, kLossEps);
    // Leave-one-out products via prefix/suffix re-multiplication.
    double prefix = 1.0;
    std::vector<double> suffix(w + 1, 1.0);
    for (std::size_t i = w; i > 0; --i) suffix[i - 1] = suffix[i] * factors[i - 1];
    for (std::size_t i = 0; i < w; ++i) {
      const double leave_out = prefix * suffix[i + 1];
      const double dvc = lit_negated(clause[i]) ? -leave_out : leave_out;
      grad[static_cast<std::size_t>(lit_var(clause[i])) - 1] += coeff * dvc;
      prefix *= factors[i];
    }
  }
  return grad;
}

MultiAssignmentLoss multi_assignment_loss(std::span<const double> column_losses) {
  const std::size_t u = column_losses.size();
  if (u == 0) throw ShapeError("multi_assignment_loss needs at least one column");
  MultiAssignmentLoss out;
  out.column_losses.assign(column_losses.begin(), column_losses.end());

  std::vector<std::size_t> order(u);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return column_losses[a] > column_losses[b];
  });

  double weighted = 0.0, weight_sum = 0.0;
  for (std::size_t rank = 0; rank < u; ++rank) {
    const double w = static_cast<double>((rank + 1) * (rank + 1));
    weighted += w * column_losses[order[rank]];
    weight_sum += w;
  }
  out.loss = weighted / weight_sum;

  out.best = 0;
  for (std::size_t j = 1; j < u; ++j)
    if (column_losses[j] < column_losses[static_cast<std::size_t>(out.best)])
      out.best = static_cast<std::int32_t>(j);
  return out;
}

MultiAssignmentLoss multi_assignment_loss(const CnfFormula& f, const MatF& outputs) {
  if (outputs.rows != f.num_vars)
    throw ShapeError("outputs row count does not match variable count");
  std::vector<double> column(static_cast<std::size_t>(f.num_vars));
  std::vector<double> losses(static_cast<std::size_t>(outputs.cols));
  for (std::int64_t j = 0; j < outputs.cols; ++j) {
    for (std::int64_t i = 0; i < outputs.rows; ++i)
      column[static_cast<std::size_t>(i)] = static_cast<double>(outputs.at(i, j));
    losses[static_cast<std::size_t>(j)] = log_loss(f, column);
  }
  return multi_assignment_loss(losses);
}

MatF per_clause_losses(const FactorGraph& g, const MatF& q) {
  if (q.rows != g.n)
    throw ShapeError("query rows " + std::to_string(q.rows) +
                     " do not match variable count " + std::to_string(g.n));
  const std::int64_t d = q.cols;
  MatF out(g.m, d);
  std::vector<double> acc(static_cast<std::size_t>(d));
  for (std::int32_t c = 0; c < g.m; ++c) {
    std::fill(acc.begin(), acc.end(), 1.0);
    for (std::int32_t k = g.clause_ptr[c]; k < g.clause_ptr[c + 1]; ++k) {
      const float* qrow = q.row(g.clause_var[static_cast<std::size_t>(k)]);
      const bool negated = g.clause_negated[static_cast<std::size_t>(k)] != 0;
      for (std::int64_t j = 0; j < d; ++j)
        acc[static_cast<std::size_t>(j)] *=
            falsity_factor(static_cast<double>(qrow[j]), negated);
    }
    float* orow = out.row(c);
    for (std::int64_t j = 0; j < d; ++j)
      orow[j] = static_cast<float>(1.0 - acc[static_cast<std::size_t>(j)]);
  }
  return out;
}

void clause_value_backward(const FactorGraph& g, const MatF& q, const MatF& upstream,
                           MatF& grad_out) {
  if (q.rows != g.n || upstream.rows != g.m || upstream.cols != q.cols ||
      grad_out.rows != q.rows || grad_out.cols != q.cols)
    throw ShapeError("clause_value_backward shape mismatch");
  const std::int64_t d = q.cols;
  std::vector<double> factors, suffix;
  for (std::int32_t c = 0; c < g.m; ++c) {
    const std::int32_t begin = g.clause_ptr[c], end = g.clause_ptr[c + 1];
    const std::int32_t w = end - begin;
    const float* up = upstream.row(c);
    factors.resize(static_cast<std::size_t>(w));
    suffix.resize(static_cast<std::size_t>(w) + 1);
    for (std::int64_t j = 0; j < d; ++j) {
      for (std::int32_t k = 0; k < w; ++k)
        factors[static_cast<std::size_t>(k)] = falsity_factor(
            static_cast<double>(q.at(g.clause_var[static_cast<std::size_t>(begin + k)], j)),
            g.clause_negated[static_cast<std::size_t>(begin + k)] != 0);
      suffix[static_cast<std::size_t>(w)] = 1.0;
      for (std::int32_t k = w; k > 0; --k)
        suffix[static_cast<std::size_t>(k - 1)] =
            suffix[static_cast<std::size_t>(k)] * factors[static_cast<std::size_t>(k - 1)];
      double prefix = 1.0;
      for (std::int32_t k = 0; k < w; ++k) {
        const double leave_out = prefix * suffix[static_cast<std::size_t>(k + 1)];
        const bool negated = g.clause_negated[static_cast<std::size_t>(begin + k)] != 0;
        const double dvc = negated ? -leave_out : leave_out;
        grad_out.at(g.clause_var[static_cast<std::size_t>(begin + k)], j) +=
            static_cast<float>(static_cast<double>(up[j]) * dvc);
        prefix *= factors[static_cast<std::size_t>(k)];
      }
    }
  }
}

MatF loss_gradient(const FactorGraph& g, const MatF& q, GradMode mode, const MatF* values) {
  MatF grad(q.rows, q.cols);
  MatF upstream(g.m, q.cols);
  if (mode == GradMode::kClauseSum) {
    std::fill(upstream.v.begin(), upstream.v.end(), 1.0f);
  } else {
    MatF local;
    if (values == nullptr) {
      local = per_clause_losses(g, q);
      values = &local;
    }
    if (values->rows != g.m || values->cols != q.cols)
      throw ShapeError("clause-value matrix shape mismatch");
    for (std::int64_t i = 0; i < upstream.size(); ++i)
      upstream.v[static_cast<std::size_t>(i)] = static_cast<float>(
          -1.0 / std::max(static_cast<double>(values->v[static_cast<std::size_t>(i)]), kLossEps));
  }
  clause_value_backward(g, q, upstream, grad);
  return grad;
}

MatF segment_log_loss(const MatF& values, std::span<const std::int32_t> clause_offsets) {
  const std::int64_t instances = static_cast<std::int64_t>(clause_offsets.size()) - 1;
  MatF out(instances, values.cols);
  std::vector<double> acc(static_cast<std::size_t>(values.cols));
  for (std::int64_t k = 0; k < instances; ++k) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::int32_t c = clause_offsets[static_cast<std::size_t>(k)];
         c < clause_offsets[static_cast<std::size_t>(k) + 1]; ++c) {
      const float* row = values.row(c);
      for (std::int64_t j = 0; j < values.cols; ++j)
        acc[static_cast<std::size_t>(j)] -=
            std::log(std::max(static_cast<double>(row[j]), kLossEps));
    }
    float* orow = out.row(k);
    for (std::int64_t j = 0; j < values.cols; ++j)
      orow[j] = static_cast<float>(acc[static_cast<std::size_t>(j)]);
  }
  return out;
}

}  // namespace qsat
