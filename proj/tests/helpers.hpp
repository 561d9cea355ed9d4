#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "qsat/cnf.hpp"
#include "qsat/rng.hpp"

namespace qsat::testing {

// Random fixture formula: 1..max_m clauses of 1..max_w distinct variables,
// fair polarities. Not satisfiability-filtered.
inline CnfFormula random_formula(Rng& rng, int num_vars, int max_m, int max_w) {
  CnfFormula f;
  f.num_vars = num_vars;
  const int m = static_cast<int>(rng.uniform_int(1, max_m));
  for (int c = 0; c < m; ++c) {
    const int w = static_cast<int>(rng.uniform_int(1, std::min(max_w, num_vars)));
    std::vector<std::int32_t> vars(static_cast<std::size_t>(num_vars));
    for (int i = 0; i < num_vars; ++i) vars[static_cast<std::size_t>(i)] = i + 1;
    for (int i = 0; i < w; ++i)
      std::swap(vars[static_cast<std::size_t>(i)],
                vars[static_cast<std::size_t>(rng.uniform_int(i, num_vars - 1))]);
    std::vector<Lit> clause;
    for (int i = 0; i < w; ++i)
      clause.push_back(rng.bernoulli(0.5) ? -vars[static_cast<std::size_t>(i)]
                                          : vars[static_cast<std::size_t>(i)]);
    f.clauses.push_back(std::move(clause));
  }
  return f;
}

inline bool clause_satisfied(const std::vector<Lit>& clause, std::uint64_t bits) {
  for (Lit lit : clause) {
    const bool val = (bits >> (std::abs(lit) - 1)) & 1u;
    if ((lit > 0) == val) return true;
  }
  return false;
}

inline bool formula_satisfied(const CnfFormula& f, std::uint64_t bits) {
  for (const auto& clause : f.clauses)
    if (!clause_satisfied(clause, bits)) return false;
  return true;
}

// Truth-table satisfiability, the ground truth the solvers answer to.
inline bool brute_force_sat(const CnfFormula& f) {
  const std::uint64_t limit = std::uint64_t{1} << f.num_vars;
  for (std::uint64_t bits = 0; bits < limit; ++bits)
    if (formula_satisfied(f, bits)) return true;
  return false;
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max({std::abs(got), std::abs(want), 1e-12});
}

}  // namespace qsat::testing
