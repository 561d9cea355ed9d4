#include <cstdint>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"

#include "qsat/error.hpp"
#include "qsat/solvers.hpp"

using namespace qsat;
using qsat::testing::brute_force_sat;
using qsat::testing::random_formula;

namespace {

CnfFormula from_clauses(std::int32_t num_vars, std::vector<Clause> clauses) {
  CnfFormula f;
  f.num_vars = num_vars;
  f.clauses = std::move(clauses);
  return f;
}

bool witness_ok(const CnfFormula& f, const SolveResult& r) {
  return r.assignment.size() == static_cast<std::size_t>(f.num_vars) &&
         check_assignment(f, r.assignment).satisfied;
}

}  // namespace

TEST_CASE("dpll settles unit chains without branching") {
  // (x1)(¬x1 v x2)(¬x2 v x3): pure propagation fixes everything.
  CnfFormula f = from_clauses(3, {{1}, {-1, 2}, {-2, 3}});
  SolveResult r = dpll_solve(f, SearchBudget{});
  REQUIRE(r.status == SolveStatus::kSat);
  CHECK(witness_ok(f, r));
  CHECK(r.assignment == std::vector<std::uint8_t>{1, 1, 1});
  CHECK(r.decisions == 0);
}

TEST_CASE("dpll eliminates pure literals without branching") {
  // x1 appears only positively, x2 only negatively.
  CnfFormula f = from_clauses(2, {{1, -2}, {1}, {-2}});
  SolveResult r = dpll_solve(f, SearchBudget{});
  REQUIRE(r.status == SolveStatus::kSat);
  CHECK(witness_ok(f, r));
  CHECK(r.decisions == 0);
}

TEST_CASE("dpll proves small contradictions unsat") {
  CnfFormula direct = from_clauses(1, {{1}, {-1}});
  CHECK(dpll_solve(direct, SearchBudget{}).status == SolveStatus::kUnsat);

  // All four clauses over two variables.
  CnfFormula square = from_clauses(2, {{1, 2}, {1, -2}, {-1, 2}, {-1, -2}});
  CHECK(dpll_solve(square, SearchBudget{}).status == SolveStatus::kUnsat);
}

TEST_CASE("dpll honors the decision budget with unknown") {
  SearchBudget none;
  none.max_decisions = 0;
  CHECK_THROWS_AS((void)dpll_solve(from_clauses(1, {{1}}), none), ConfigError);

  Rng rng(5);
  // Some formula in the mix needs more than one branch.
  bool saw_unknown = false;
  for (int t = 0; t < 60 && !saw_unknown; ++t) {
    CnfFormula f = random_formula(rng, 12, 40, 3);
    SearchBudget strangled;
    strangled.max_decisions = 1;
    SolveResult r = dpll_solve(f, strangled);
    if (r.status == SolveStatus::kUnknown) saw_unknown = true;
    else CHECK(r.decisions <= 1);
  }
  CHECK(saw_unknown);
}

TEST_CASE("dpll agrees with the truth table on random formulas") {
  Rng rng(7);
  int sat_seen = 0, unsat_seen = 0;
  for (int t = 0; t < 150; ++t) {
    CnfFormula f = random_formula(rng, 8, 24, 3);
    const bool want = brute_force_sat(f);
    SolveResult r = dpll_solve(f, SearchBudget{});
    REQUIRE(r.status != SolveStatus::kUnknown);
    CHECK((r.status == SolveStatus::kSat) == want);
    if (want) {
      CHECK(witness_ok(f, r));
      ++sat_seen;
    } else {
      ++unsat_seen;
    }
  }
  CHECK(sat_seen > 20);  // the mix actually exercises both outcomes
  CHECK(unsat_seen > 20);
}

TEST_CASE("gsat solves a two-unit formula within two flips") {
  CnfFormula f = from_clauses(2, {{1}, {2}});
  SearchBudget budget;
  budget.max_flips = 2;
  budget.max_tries = 1;
  Rng rng(3);
  SolveResult r = gsat_solve(f, budget, rng);
  REQUIRE(r.status == SolveStatus::kSat);
  CHECK(witness_ok(f, r));
  CHECK(r.flips <= 2);
}

TEST_CASE("gsat never claims unsat") {
  CnfFormula f = from_clauses(1, {{1}, {-1}});
  SearchBudget budget;
  budget.max_flips = 50;
  budget.max_tries = 2;
  Rng rng(11);
  SolveResult r = gsat_solve(f, budget, rng);
  CHECK(r.status == SolveStatus::kUnknown);
  CHECK(r.tries == 2);
  CHECK(r.flips == 100);  // both tries exhaust their budget
}

TEST_CASE("gsat witnesses are always verified satisfying assignments") {
  Rng data_rng(13);
  Rng search_rng(17);
  int solved = 0, satisfiable = 0;
  for (int t = 0; t < 60; ++t) {
    CnfFormula f = random_formula(data_rng, 8, 20, 3);
    const bool want = brute_force_sat(f);
    satisfiable += want ? 1 : 0;
    SearchBudget budget;
    budget.max_flips = 200;
    budget.max_tries = 3;
    SolveResult r = gsat_solve(f, budget, search_rng);
    if (r.status == SolveStatus::kSat) {
      CHECK(want);  // a witness on an unsatisfiable formula would be a lie
      CHECK(witness_ok(f, r));
      ++solved;
    }
  }
  CHECK(solved > satisfiable / 2);  // easy instances mostly fall
}

TEST_CASE("gsat search is deterministic for a fixed stream") {
  Rng data_rng(19);
  CnfFormula f = random_formula(data_rng, 10, 30, 3);
  SearchBudget budget;
  budget.max_flips = 300;
  budget.max_tries = 2;

  Rng r1(23), r2(23);
  SolveResult a = gsat_solve(f, budget, r1);
  SolveResult b = gsat_solve(f, budget, r2);
  CHECK(a.status == b.status);
  CHECK(a.flips == b.flips);
  CHECK(a.tries == b.tries);
  CHECK(a.assignment == b.assignment);
}

TEST_CASE("paranoid recounting does not change the gsat outcome") {
  Rng data_rng(29);
  CnfFormula f = random_formula(data_rng, 10, 30, 3);
  SearchBudget fast;
  fast.max_flips = 2'500;
  fast.max_tries = 2;
  SearchBudget careful = fast;
  careful.paranoid = true;

  Rng r1(31), r2(31);
  SolveResult a = gsat_solve(f, fast, r1);
  SolveResult b = gsat_solve(f, careful, r2);
  CHECK(a.status == b.status);
  CHECK(a.flips == b.flips);
  CHECK(a.assignment == b.assignment);
}

TEST_CASE("solvers accept a formula with no clauses") {
  CnfFormula f;
  f.num_vars = 3;
  SolveResult d = dpll_solve(f, SearchBudget{});
  CHECK(d.status == SolveStatus::kSat);
  CHECK(d.assignment.size() == 3);
  Rng rng(1);
  SolveResult g = gsat_solve(f, SearchBudget{}, rng);
  CHECK(g.status == SolveStatus::kSat);
}
