#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qsat/cnf.hpp"

namespace qsat {

// 0/1 sparsity pattern in CSR form. All stored entries are 1, so products
// against dense matrices are gather-sums.
struct SparseMat {
  std::int32_t rows = 0;
  std::int32_t cols = 0;
  std::vector<std::int32_t> row_ptr;  // rows + 1
  std::vector<std::int32_t> col_idx;  // nnz, ascending within each row

  std::int64_t nnz() const { return static_cast<std::int64_t>(col_idx.size()); }
  SparseMat transposed() const;
};

// Variable-clause incidence of a formula (or of a batched disjoint union).
// pos[i,c] = 1 iff variable i occurs positively in clause c, neg likewise
// for negated occurrences. pos_t/neg_t are the transposes, kept so both
// message directions are a forward CSR walk.
//
// clause_ptr/clause_var/clause_negated store each clause's literals in
// formula order; the loss kernels walk clauses through these.
struct FactorGraph {
  std::int32_t n = 0;  // variables
  std::int32_t m = 0;  // clauses
  SparseMat pos;       // n x m
  SparseMat neg;       // n x m
  SparseMat pos_t;     // m x n
  SparseMat neg_t;     // m x n
  std::vector<std::int32_t> clause_ptr;      // m + 1
  std::vector<std::int32_t> clause_var;      // 0-based variable index per literal
  std::vector<std::uint8_t> clause_negated;  // 1 if the literal is negated

  std::int64_t literal_count() const { return static_cast<std::int64_t>(clause_var.size()); }
};

FactorGraph build_factor_graph(const CnfFormula& f);

// Several formulas packed into one disjoint-union factor graph. Instance k
// owns variable rows [var_offsets[k], var_offsets[k+1]) and clause rows
// [clause_offsets[k], clause_offsets[k+1]).
struct Batch {
  FactorGraph graph;
  std::vector<std::int32_t> var_offsets;     // count + 1, prefix offsets
  std::vector<std::int32_t> clause_offsets;  // count + 1
  std::vector<std::int64_t> instance_ids;

  std::int32_t count() const { return static_cast<std::int32_t>(instance_ids.size()); }
  std::int32_t vars_of(std::int32_t k) const { return var_offsets[k + 1] - var_offsets[k]; }
  std::int32_t clauses_of(std::int32_t k) const { return clause_offsets[k + 1] - clause_offsets[k]; }
};

Batch make_batch(std::span<const CnfFormula> formulas, std::span<const std::int64_t> ids);

// Greedy first-fit packing in input order: each formula goes into the first
// open batch whose node count (n + m) stays within node_budget. Throws
// DataError naming the instance if a single formula exceeds the budget.
// instance_ids defaults to the input index when ids is empty.
std::vector<Batch> batch_formulas(std::span<const CnfFormula> formulas,
                                  std::int64_t node_budget,
                                  std::span<const std::int64_t> ids = {});

}  // namespace qsat
