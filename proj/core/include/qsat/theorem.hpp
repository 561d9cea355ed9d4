#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "qsat/cnf.hpp"

namespace qsat {

// Twin-prime house (a, b) with b - a = h and a > h.
struct PrimePair {
  mpz_class a;
  mpz_class b;
};

// The identifying query point x_i = h / b_i, one coordinate per variable.
// All 2n primes are pairwise distinct, so every clause loss below reduces
// to a fraction whose denominator factors name exactly the clause's
// variables.
struct RationalQuery {
  mpz_class h;
  std::vector<PrimePair> pairs;
  std::vector<mpq_class> x;

  std::int32_t num_vars() const { return static_cast<std::int32_t>(pairs.size()); }
};

struct RationalClauseLoss {
  std::int64_t clause_index = 0;
  mpq_class value;  // exact V_c at the query point, in lowest terms
};

// First n twin-prime pairs with gap h in increasing order, skipping any
// candidate that shares a prime with an already selected pair.
std::vector<PrimePair> gen_prime_pairs(int n, const mpz_class& h = 2);

RationalQuery build_identifying_query(int n, const mpz_class& h = 2);

// Exact V_c = 1 - prod_{i in c+}(1 - x_i) * prod_{i in c-} x_i.
RationalClauseLoss rational_clause_loss(const CnfFormula& f, const RationalQuery& query,
                                        std::int64_t clause);

std::vector<RationalClauseLoss> rational_clause_losses(const CnfFormula& f,
                                                       const RationalQuery& query);

// Inverts one clause loss: the denominator of 1 - V_c names the variable
// set, numerator factors a_i name the positive literals, and the residual
// must be h to the number of negated literals. Throws DataError when the
// fraction could not have come from this query.
std::vector<Lit> decode_clause(const RationalClauseLoss& loss, const RationalQuery& query);

// decode_clause per entry, preserving clause order.
CnfFormula decode_formula(const std::vector<RationalClauseLoss>& losses,
                          const RationalQuery& query);

struct Theorem1Report {
  std::int64_t clauses_checked = 0;
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

// At a binary x, every clause value and the product loss must be exactly 0
// or 1 and agree with Boolean evaluation; any discrepancy is reported.
Theorem1Report verify_theorem1(const CnfFormula& f, std::span<const std::uint8_t> x);

// The per-assignment check swept over all 2^n assignments.
Theorem1Report verify_theorem1_exhaustive(const CnfFormula& f);

}  // namespace qsat
