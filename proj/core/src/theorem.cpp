#include "qsat/theorem.hpp"

#include <algorithm>
#include <cstdlib>

#include "qsat/error.hpp"
#include "qsat/loss.hpp"

namespace qsat {
namespace {

bool is_prime(const mpz_class& v) {
  // 40 Miller-Rabin rounds; far below any plausible false-positive rate for
  // the pair sizes reachable here.
  return mpz_probab_prime_p(v.get_mpz_t(), 40) > 0;
}

}  // namespace

std::vector<PrimePair> gen_prime_pairs(int n, const mpz_class& h) {
  if (n < 0) throw ConfigError("prime pair count must be nonnegative");
  if (h < 2 || mpz_odd_p(h.get_mpz_t())) throw ConfigError("prime gap must be a positive even number");

  std::vector<PrimePair> out;
  out.reserve(static_cast<std::size_t>(n));
  mpz_class p = 2;
  while (static_cast<int>(out.size()) < n) {
    mpz_nextprime(p.get_mpz_t(), p.get_mpz_t());
    if (p <= h) continue;
    mpz_class q = p + h;
    if (!is_prime(q)) continue;
    bool collides = false;
    for (const PrimePair& sel : out) {
      if (p == sel.b || q == sel.a) {
        collides = true;
        break;
      }
    }
    if (collides) continue;
    out.push_back(PrimePair{p, q});
  }
  return out;
}

RationalQuery build_identifying_query(int n, const mpz_class& h) {
  RationalQuery query;
  query.h = h;
  query.pairs = gen_prime_pairs(n, h);
  query.x.reserve(query.pairs.size());
  for (const PrimePair& pp : query.pairs) {
    mpq_class xi(h, pp.b);
    xi.canonicalize();
    query.x.push_back(std::move(xi));
  }
  return query;
}

RationalClauseLoss rational_clause_loss(const CnfFormula& f, const RationalQuery& query,
                                        std::int64_t clause) {
  if (clause < 0 || clause >= static_cast<std::int64_t>(f.clauses.size()))
    throw ConfigError("clause index out of range");
  RationalClauseLoss out;
  out.clause_index = clause;
  mpq_class falsity = 1;
  for (Lit lit : f.clauses[static_cast<std::size_t>(clause)]) {
    const std::int32_t v = std::abs(lit);
    if (v < 1 || v > query.num_vars())
      throw ConfigError("clause names variable " + std::to_string(v) +
                        " outside the query's " + std::to_string(query.num_vars()) + " variables");
    const mpq_class& xi = query.x[static_cast<std::size_t>(v - 1)];
    falsity *= (lit > 0) ? mpq_class(1 - xi) : xi;
  }
  out.value = 1 - falsity;
  out.value.canonicalize();
  return out;
}

std::vector<RationalClauseLoss> rational_clause_losses(const CnfFormula& f,
                                                       const RationalQuery& query) {
  std::vector<RationalClauseLoss> out;
  out.reserve(f.clauses.size());
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(f.clauses.size()); ++c)
    out.push_back(rational_clause_loss(f, query, c));
  return out;
}

std::vector<Lit> decode_clause(const RationalClauseLoss& loss, const RationalQuery& query) {
  mpq_class falsity = 1 - loss.value;
  falsity.canonicalize();
  mpz_class num = falsity.get_num();
  mpz_class den = falsity.get_den();
  if (falsity < 0 || num == 0)
    throw DataError("clause " + std::to_string(loss.clause_index) +
                    ": loss is not in the decodable range");

  // Denominator factors name the clause's variables.
  std::vector<std::int32_t> vars;
  for (std::int32_t i = 0; i < query.num_vars(); ++i) {
    const mpz_class& b = query.pairs[static_cast<std::size_t>(i)].b;
    if (mpz_divisible_p(den.get_mpz_t(), b.get_mpz_t())) {
      vars.push_back(i + 1);
      den /= b;
    }
  }
  if (den != 1)
    throw DataError("clause " + std::to_string(loss.clause_index) +
                    ": denominator has a prime factor outside the query's pairs");

  // Numerator factors a_i mark positives; the rest must be h per negation.
  std::vector<Lit> clause;
  int negatives = 0;
  for (std::int32_t v : vars) {
    const mpz_class& a = query.pairs[static_cast<std::size_t>(v - 1)].a;
    if (mpz_divisible_p(num.get_mpz_t(), a.get_mpz_t())) {
      clause.push_back(v);
      num /= a;
    } else {
      clause.push_back(-v);
      ++negatives;
    }
  }
  mpz_class expected;
  mpz_pow_ui(expected.get_mpz_t(), query.h.get_mpz_t(), static_cast<unsigned long>(negatives));
  if (num != expected) {
    for (std::int32_t i = 0; i < query.num_vars(); ++i) {
      const mpz_class& a = query.pairs[static_cast<std::size_t>(i)].a;
      if (std::find(vars.begin(), vars.end(), i + 1) == vars.end() &&
          mpz_divisible_p(num.get_mpz_t(), a.get_mpz_t()))
        throw DataError("clause " + std::to_string(loss.clause_index) + ": numerator names variable " +
                        std::to_string(i + 1) + " that the denominator does not contain");
    }
    throw DataError("clause " + std::to_string(loss.clause_index) +
                    ": numerator residual is not the expected power of the gap");
  }
  return clause;
}

CnfFormula decode_formula(const std::vector<RationalClauseLoss>& losses,
                          const RationalQuery& query) {
  CnfFormula f;
  f.num_vars = query.num_vars();
  f.clauses.reserve(losses.size());
  for (const RationalClauseLoss& loss : losses) f.clauses.push_back(decode_clause(loss, query));
  return f;
}

Theorem1Report verify_theorem1(const CnfFormula& f, std::span<const std::uint8_t> x) {
  if (static_cast<std::int32_t>(x.size()) != f.num_vars)
    throw ConfigError("assignment size does not match variable count");
  std::vector<double> xd(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 1) throw ConfigError("assignment is not binary");
    xd[i] = static_cast<double>(x[i]);
  }

  Theorem1Report report;
  bool formula_sat = true;
  for (std::int32_t c = 0; c < static_cast<std::int32_t>(f.clauses.size()); ++c) {
    const double v = clause_value(f, xd, c);
    bool clause_sat = false;
    for (Lit lit : f.clauses[static_cast<std::size_t>(c)]) {
      const bool val = x[static_cast<std::size_t>(std::abs(lit) - 1)] != 0;
      if ((lit > 0) == val) {
        clause_sat = true;
        break;
      }
    }
    formula_sat = formula_sat && clause_sat;
    const double expected = clause_sat ? 1.0 : 0.0;
    if (v != expected)
      report.violations.push_back("clause " + std::to_string(c) + ": value " + std::to_string(v) +
                                  " but Boolean evaluation says " + std::to_string(expected));
    ++report.clauses_checked;
  }
  const double lphi = formula_value(f, xd);
  const double expected = formula_sat ? 1.0 : 0.0;
  if (lphi != expected)
    report.violations.push_back("formula value " + std::to_string(lphi) +
                                " but Boolean evaluation says " + std::to_string(expected));
  return report;
}

Theorem1Report verify_theorem1_exhaustive(const CnfFormula& f) {
  if (f.num_vars > 24)
    throw ConfigError("exhaustive sweep limited to 24 variables; got " +
                      std::to_string(f.num_vars));
  Theorem1Report total;
  std::vector<std::uint8_t> x(static_cast<std::size_t>(f.num_vars), 0);
  const std::uint64_t limit = std::uint64_t{1} << f.num_vars;
  for (std::uint64_t bits = 0; bits < limit; ++bits) {
    for (std::int32_t i = 0; i < f.num_vars; ++i)
      x[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>((bits >> i) & 1u);
    Theorem1Report one = verify_theorem1(f, x);
    total.clauses_checked += one.clauses_checked;
    for (std::string& v : one.violations)
      total.violations.push_back("assignment " + std::to_string(bits) + ": " + std::move(v));
  }
  return total;
}

}  // namespace qsat
