#pragma once

#include <cstdint>
#include <vector>

#include "qsat/cnf.hpp"
#include "qsat/rng.hpp"

namespace qsat {

struct SearchBudget {
  std::int64_t max_flips = 50'000;        // per try (GSAT)
  std::int32_t max_tries = 10;            // restarts (GSAT)
  std::int64_t max_decisions = 1'000'000; // branching decisions (DPLL)
  double wall_limit_seconds = 0.0;        // 0 disables the wall-clock check
  bool paranoid = false;                  // GSAT: recount satisfied clauses every 1000 flips
};

enum class SolveStatus { kSat, kUnsat, kUnknown };

struct SolveResult {
  SolveStatus status = SolveStatus::kUnknown;
  std::vector<std::uint8_t> assignment;  // witness, only for kSat
  std::int64_t flips = 0;
  std::int64_t decisions = 0;
  std::int32_t tries = 0;
  double wall_seconds = 0.0;
};

// GSAT: per try, start from a uniform random assignment and repeatedly flip
// a variable that maximizes the increase in satisfied-clause count, breaking
// ties uniformly at random (the flip is taken even when the best increase is
// zero or negative). Incomplete: never reports unsat.
SolveResult gsat_solve(const CnfFormula& f, const SearchBudget& budget, Rng& rng);

// DPLL with two-watched-literal unit propagation and pure-literal
// elimination; branches on the most frequently occurring unassigned
// variable among unsatisfied clauses, positive polarity first. Complete
// within the decision budget; budget exhaustion yields kUnknown.
SolveResult dpll_solve(const CnfFormula& f, const SearchBudget& budget);

}  // namespace qsat
