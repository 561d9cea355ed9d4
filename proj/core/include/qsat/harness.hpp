#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "qsat/cnf.hpp"
#include "qsat/model.hpp"

namespace qsat {

inline constexpr const char* kVersion = "0.1.0";

// Per-solver budgets. One full budget is reported as budget_seconds of
// modeled time; per-instance cost is the used fraction of the budget, so
// benchmark CSVs are byte-stable across reruns and machines.
struct BenchLimits {
  int querysat_steps = 1024;
  std::int64_t gsat_flips_per_try = 50'000;
  int gsat_tries = 10;
  std::int64_t dpll_decisions = 1'000'000;
  std::int64_t node_budget = 20'000;
  std::uint64_t seed = 1;
  double budget_seconds = 2.0;
  int workers = 1;

  void validate() const;
};

struct BenchRecord {
  std::int64_t instance = 0;
  std::string solver;
  std::string status;      // sat | unsat | unknown | timeout
  double seconds = 0.0;    // modeled, budget fraction
  std::int64_t units = 0;  // recurrent steps, flips, or decisions used
  std::int32_t exit_step = -1;
};

// Runs one named solver ("querysat", "gsat", or "dpll") over the set; the
// model is required for querysat and ignored otherwise. Records come back
// in instance order regardless of worker scheduling.
std::vector<BenchRecord> bench_solver(const std::string& solver,
                                      std::span<const CnfFormula> formulas, const Model* model,
                                      const BenchLimits& limits);

struct CactusRow {
  std::string solver;
  std::int64_t solved_count = 0;
  double cumulative_seconds = 0.0;
};

// Standard cactus construction: per solver, decided instances sorted by
// time ascending, prefix-summed.
std::vector<CactusRow> cactus_series(std::span<const BenchRecord> records);

void write_bench_csv(std::ostream& out, std::span<const BenchRecord> records);
void write_cactus_csv(std::ostream& out, std::span<const CactusRow> rows);

// Query-introspection metrics at one checkpoint. Queries and output
// activations are discretized by rounding; the headline numbers use query
// column 0 and each *_colmean twin averages the same metric over all query
// columns. Every per-step metric is averaged over steps, then per
// instance, then across instances.
struct ProbeRecord {
  std::int64_t iteration = 0;
  double query_logit_match = 0.0;          // percent
  double query_sat_clause_fraction = 0.0;  // percent
  double consecutive_query_match = 0.0;    // percent, final two steps
  double query_logit_match_colmean = 0.0;
  double query_sat_clause_fraction_colmean = 0.0;
  double consecutive_query_match_colmean = 0.0;
  double solved_fraction = 0.0;  // of the probe set, same eval pass
};

// Eval-mode forward with an instrumenting observer; requires a
// query-bearing architecture and steps >= 2.
ProbeRecord probe_model(const Model& model, std::span<const CnfFormula> formulas, int steps,
                        std::int64_t node_budget, std::uint64_t noise_seed);

void write_probe_csv(std::ostream& out, std::span<const ProbeRecord> rows);

}  // namespace qsat
