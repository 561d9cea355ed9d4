#include "qsat/graph.hpp"

#include <numeric>

#include "qsat/error.hpp"

namespace qsat {

SparseMat SparseMat::transposed() const {
  SparseMat t;
  t.rows = cols;
  t.cols = rows;
  t.row_ptr.assign(static_cast<std::size_t>(cols) + 1, 0);
  t.col_idx.resize(col_idx.size());
  for (std::int32_t c : col_idx) ++t.row_ptr[static_cast<std::size_t>(c) + 1];
  for (std::size_t i = 1; i < t.row_ptr.size(); ++i) t.row_ptr[i] += t.row_ptr[i - 1];
  std::vector<std::int32_t> fill(t.row_ptr.begin(), t.row_ptr.end() - 1);
  for (std::int32_t r = 0; r < rows; ++r)
    for (std::int32_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
      t.col_idx[static_cast<std::size_t>(fill[static_cast<std::size_t>(col_idx[static_cast<std::size_t>(k)])]++)] = r;
  return t;
}

namespace {

SparseMat csr_from_pairs(std::int32_t rows, std::int32_t cols,
                         const std::vector<std::pair<std::int32_t, std::int32_t>>& entries) {
  SparseMat s;
  s.rows = rows;
  s.cols = cols;
  s.row_ptr.assign(static_cast<std::size_t>(rows) + 1, 0);
  for (const auto& [r, c] : entries) {
    (void)c;
    ++s.row_ptr[static_cast<std::size_t>(r) + 1];
  }
  for (std::size_t i = 1; i < s.row_ptr.size(); ++i) s.row_ptr[i] += s.row_ptr[i - 1];
  s.col_idx.resize(entries.size());
  std::vector<std::int32_t> fill(s.row_ptr.begin(), s.row_ptr.end() - 1);
  for (const auto& [r, c] : entries) s.col_idx[static_cast<std::size_t>(fill[static_cast<std::size_t>(r)]++)] = c;
  return s;
}

}  // namespace

FactorGraph build_factor_graph(const CnfFormula& f) {
  FactorGraph g;
  g.n = f.num_vars;
  g.m = f.num_clauses();
  g.clause_ptr.reserve(static_cast<std::size_t>(g.m) + 1);
  g.clause_ptr.push_back(0);

  // Clause order, then literal order within the clause; var->clause entries
  // come out sorted because clause indices ascend.
  std::vector<std::pair<std::int32_t, std::int32_t>> pos_entries, neg_entries;
  for (std::int32_t c = 0; c < g.m; ++c) {
    for (Lit l : f.clauses[static_cast<std::size_t>(c)]) {
      const std::int32_t v = lit_var(l) - 1;
      g.clause_var.push_back(v);
      g.clause_negated.push_back(lit_negated(l) ? 1 : 0);
      (lit_negated(l) ? neg_entries : pos_entries).emplace_back(v, c);
    }
    g.clause_ptr.push_back(static_cast<std::int32_t>(g.clause_var.size()));
  }
  g.pos = csr_from_pairs(g.n, g.m, pos_entries);
  g.neg = csr_from_pairs(g.n, g.m, neg_entries);
  g.pos_t = g.pos.transposed();
  g.neg_t = g.neg.transposed();
  return g;
}

Batch make_batch(std::span<const CnfFormula> formulas, std::span<const std::int64_t> ids) {
  CnfFormula merged;
  Batch b;
  b.var_offsets.push_back(0);
  b.clause_offsets.push_back(0);
  for (std::size_t k = 0; k < formulas.size(); ++k) {
    const CnfFormula& f = formulas[k];
    const std::int32_t base = merged.num_vars;
    merged.num_vars += f.num_vars;
    for (const auto& clause : f.clauses) {
      Clause shifted;
      shifted.reserve(clause.size());
      for (Lit l : clause) shifted.push_back(l > 0 ? l + base : l - base);
      merged.clauses.push_back(std::move(shifted));
    }
    b.var_offsets.push_back(merged.num_vars);
    b.clause_offsets.push_back(merged.num_clauses());
    b.instance_ids.push_back(ids.empty() ? static_cast<std::int64_t>(k) : ids[k]);
  }
  b.graph = build_factor_graph(merged);
  return b;
}

std::vector<Batch> batch_formulas(std::span<const CnfFormula> formulas,
                                  std::int64_t node_budget,
                                  std::span<const std::int64_t> ids) {
  struct Open {
    std::vector<CnfFormula> formulas;
    std::vector<std::int64_t> ids;
    std::int64_t nodes = 0;
  };
  std::vector<Open> open;
  for (std::size_t k = 0; k < formulas.size(); ++k) {
    const CnfFormula& f = formulas[k];
    const std::int64_t nodes = static_cast<std::int64_t>(f.num_vars) + f.num_clauses();
    const std::int64_t id = ids.empty() ? static_cast<std::int64_t>(k) : ids[k];
    if (nodes > node_budget)
      throw DataError("instance " + std::to_string(id) + " has " + std::to_string(nodes) +
                      " nodes, exceeding the node budget " + std::to_string(node_budget));
    bool placed = false;
    for (auto& o : open) {
      if (o.nodes + nodes <= node_budget) {
        o.formulas.push_back(f);
        o.ids.push_back(id);
        o.nodes += nodes;
        placed = true;
        break;
      }
    }
    if (!placed) {
      open.emplace_back();
      open.back().formulas.push_back(f);
      open.back().ids.push_back(id);
      open.back().nodes = nodes;
    }
  }
  std::vector<Batch> batches;
  batches.reserve(open.size());
  for (auto& o : open) batches.push_back(make_batch(o.formulas, o.ids));
  return batches;
}

}  // namespace qsat
