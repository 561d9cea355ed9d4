#include "qsat/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>

#include "qsat/error.hpp"
#include "qsat/rng.hpp"
#include "qsat/solvers.hpp"
#include "qsat/train.hpp"

namespace qsat {
namespace {

const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::kSat: return "sat";
    case SolveStatus::kUnsat: return "unsat";
    case SolveStatus::kUnknown: return "unknown";
  }
  return "unknown";
}

// Deterministic work split: workers pull indices from a shared counter and
// write into preallocated slots, so the merged order is the index order.
void parallel_for(std::int64_t n, int workers, const std::function<void(std::int64_t)>& fn) {
  workers = static_cast<int>(std::min<std::int64_t>(std::max(workers, 1), std::max<std::int64_t>(n, 1)));
  if (workers <= 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::int64_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::string format_seconds(double s) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", s);
  return buf;
}

std::string format_percent(double p) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", p);
  return buf;
}

}  // namespace

void BenchLimits::validate() const {
  if (querysat_steps <= 0 || gsat_flips_per_try <= 0 || gsat_tries <= 0 || dpll_decisions <= 0)
    throw ConfigError("all solver budgets must be positive");
  if (node_budget <= 0) throw ConfigError("node_budget must be positive");
  if (budget_seconds <= 0) throw ConfigError("budget_seconds must be positive");
  if (workers <= 0) throw ConfigError("workers must be positive");
}

std::vector<BenchRecord> bench_solver(const std::string& solver,
                                      std::span<const CnfFormula> formulas, const Model* model,
                                      const BenchLimits& limits) {
  limits.validate();
  const std::int64_t n = static_cast<std::int64_t>(formulas.size());
  std::vector<BenchRecord> records(static_cast<std::size_t>(n));

  if (solver == "querysat") {
    if (!model) throw ConfigError("querysat benchmarking needs a checkpointed model");
    EvalResult er = evaluate(*model, formulas, {}, limits.querysat_steps, limits.node_budget,
                             fold_seed(limits.seed, 3));
    for (std::int64_t i = 0; i < n; ++i) {
      BenchRecord& r = records[static_cast<std::size_t>(i)];
      r.instance = i;
      r.solver = solver;
      const bool solved = er.solved[static_cast<std::size_t>(i)] != 0;
      r.status = solved ? "sat" : "unknown";
      r.exit_step = er.exit_step[static_cast<std::size_t>(i)];
      r.units = solved ? r.exit_step : limits.querysat_steps;
      r.seconds = static_cast<double>(r.units) / limits.querysat_steps * limits.budget_seconds;
    }
    return records;
  }

  if (solver == "gsat") {
    const double total_budget =
        static_cast<double>(limits.gsat_flips_per_try) * limits.gsat_tries;
    parallel_for(n, limits.workers, [&](std::int64_t i) {
      SearchBudget budget;
      budget.max_flips = limits.gsat_flips_per_try;
      budget.max_tries = limits.gsat_tries;
      Rng rng(fold_seed(limits.seed, static_cast<std::uint64_t>(i)));
      SolveResult sr = gsat_solve(formulas[static_cast<std::size_t>(i)], budget, rng);
      BenchRecord& r = records[static_cast<std::size_t>(i)];
      r.instance = i;
      r.solver = solver;
      r.status = status_name(sr.status);
      r.units = sr.flips;
      r.seconds = static_cast<double>(sr.flips) / total_budget * limits.budget_seconds;
    });
    return records;
  }

  if (solver == "dpll") {
    parallel_for(n, limits.workers, [&](std::int64_t i) {
      SearchBudget budget;
      budget.max_decisions = limits.dpll_decisions;
      SolveResult sr = dpll_solve(formulas[static_cast<std::size_t>(i)], budget);
      BenchRecord& r = records[static_cast<std::size_t>(i)];
      r.instance = i;
      r.solver = solver;
      r.status = status_name(sr.status);
      r.units = sr.decisions;
      r.seconds =
          static_cast<double>(sr.decisions) / limits.dpll_decisions * limits.budget_seconds;
    });
    return records;
  }

  throw ConfigError("unknown solver '" + solver + "' (expected querysat, gsat, or dpll)");
}

std::vector<CactusRow> cactus_series(std::span<const BenchRecord> records) {
  std::vector<std::string> solvers;
  for (const BenchRecord& r : records)
    if (std::find(solvers.begin(), solvers.end(), r.solver) == solvers.end())
      solvers.push_back(r.solver);

  std::vector<CactusRow> rows;
  for (const std::string& solver : solvers) {
    std::vector<double> times;
    for (const BenchRecord& r : records)
      if (r.solver == solver && (r.status == "sat" || r.status == "unsat"))
        times.push_back(r.seconds);
    std::sort(times.begin(), times.end());
    double cum = 0.0;
    std::int64_t count = 0;
    for (double t : times) {
      cum += t;
      rows.push_back(CactusRow{solver, ++count, cum});
    }
  }
  return rows;
}

void write_bench_csv(std::ostream& out, std::span<const BenchRecord> records) {
  out << "instance,solver,status,seconds,units,exit_step\n";
  for (const BenchRecord& r : records)
    out << r.instance << ',' << r.solver << ',' << r.status << ',' << format_seconds(r.seconds)
        << ',' << r.units << ',' << r.exit_step << '\n';
}

void write_cactus_csv(std::ostream& out, std::span<const CactusRow> rows) {
  out << "solver,solved_count,cumulative_seconds\n";
  for (const CactusRow& r : rows)
    out << r.solver << ',' << r.solved_count << ',' << format_seconds(r.cumulative_seconds)
        << '\n';
}

ProbeRecord probe_model(const Model& model, std::span<const CnfFormula> formulas, int steps,
                        std::int64_t node_budget, std::uint64_t noise_seed) {
  if (model.config().architecture == Architecture::kNeuroCore)
    throw ConfigError("probing needs a query-bearing architecture");
  if (steps < 2) throw ConfigError("probing needs at least 2 recurrent steps");
  const std::size_t n = formulas.size();
  if (n == 0) throw ConfigError("probe set is empty");

  struct Acc {
    double match0 = 0.0, matchm = 0.0;
    double sat0 = 0.0, satm = 0.0;
    double consec0 = 0.0, consecm = 0.0;
    std::int64_t steps_seen = 0;
  };
  std::vector<Acc> acc(n);
  std::vector<std::uint8_t> prev_disc;  // previous step's rounded query, batch-local

  const StepObserver observer = [&](int step, const StepOutput& out, const ModelState&,
                                    const Batch& batch) {
    const Tensor& q = out.query;
    const int d = static_cast<int>(q.cols());
    std::vector<std::uint8_t> disc(q.size());
    for (std::size_t i = 0; i < disc.size(); ++i)
      disc[i] = q.data()[i] >= 0.5f ? std::uint8_t{1} : std::uint8_t{0};

    for (std::int64_t b = 0; b < batch.count(); ++b) {
      Acc& a = acc[static_cast<std::size_t>(batch.instance_ids[static_cast<std::size_t>(b)])];
      ++a.steps_seen;
      const std::int64_t v0 = batch.var_offsets[static_cast<std::size_t>(b)];
      const std::int64_t v1 = batch.var_offsets[static_cast<std::size_t>(b) + 1];
      const std::int64_t c0 = batch.clause_offsets[static_cast<std::size_t>(b)];
      const std::int64_t c1 = batch.clause_offsets[static_cast<std::size_t>(b) + 1];
      const std::int64_t nb = v1 - v0;
      const std::int64_t mb = c1 - c0;
      const int best = out.best_column[static_cast<std::size_t>(b)];

      std::int64_t hit0 = 0;
      std::int64_t hitm = 0;
      for (std::int64_t i = v0; i < v1; ++i) {
        const std::uint8_t logit =
            out.assignments.at(i, best) >= 0.5f ? std::uint8_t{1} : std::uint8_t{0};
        const std::uint8_t* row = disc.data() + static_cast<std::size_t>(i) * d;
        if (row[0] == logit) ++hit0;
        for (int j = 0; j < d; ++j)
          if (row[j] == logit) ++hitm;
      }
      a.match0 += static_cast<double>(hit0) / static_cast<double>(nb);
      a.matchm += static_cast<double>(hitm) / static_cast<double>(nb * d);

      std::int64_t sat0 = 0;
      std::int64_t satm = 0;
      const FactorGraph& g = batch.graph;
      for (std::int64_t c = c0; c < c1; ++c) {
        bool any0 = false;
        std::vector<std::uint8_t> anyj(static_cast<std::size_t>(d), 0);
        for (std::int64_t t = g.clause_ptr[static_cast<std::size_t>(c)];
             t < g.clause_ptr[static_cast<std::size_t>(c) + 1]; ++t) {
          const std::int64_t var_row = g.clause_var[static_cast<std::size_t>(t)];
          const std::uint8_t neg = g.clause_negated[static_cast<std::size_t>(t)];
          const std::uint8_t* row = disc.data() + static_cast<std::size_t>(var_row) * d;
          if (row[0] != neg) any0 = true;
          for (int j = 0; j < d; ++j)
            if (row[j] != neg) anyj[static_cast<std::size_t>(j)] = 1;
        }
        if (any0) ++sat0;
        for (int j = 0; j < d; ++j) satm += anyj[static_cast<std::size_t>(j)];
      }
      a.sat0 += static_cast<double>(sat0) / static_cast<double>(mb);
      a.satm += static_cast<double>(satm) / static_cast<double>(mb * d);

      if (step >= 2) {
        std::int64_t same0 = 0;
        std::int64_t samem = 0;
        for (std::int64_t i = v0; i < v1; ++i) {
          const std::uint8_t* row = disc.data() + static_cast<std::size_t>(i) * d;
          const std::uint8_t* old = prev_disc.data() + static_cast<std::size_t>(i) * d;
          if (row[0] == old[0]) ++same0;
          for (int j = 0; j < d; ++j)
            if (row[j] == old[j]) ++samem;
        }
        a.consec0 = static_cast<double>(same0) / static_cast<double>(nb);
        a.consecm = static_cast<double>(samem) / static_cast<double>(nb * d);
      }
    }
    prev_disc = std::move(disc);
  };

  EvalResult er = evaluate(model, formulas, {}, steps, node_budget, noise_seed, observer);

  ProbeRecord rec;
  for (const Acc& a : acc) {
    rec.query_logit_match += a.match0 / static_cast<double>(a.steps_seen);
    rec.query_logit_match_colmean += a.matchm / static_cast<double>(a.steps_seen);
    rec.query_sat_clause_fraction += a.sat0 / static_cast<double>(a.steps_seen);
    rec.query_sat_clause_fraction_colmean += a.satm / static_cast<double>(a.steps_seen);
    rec.consecutive_query_match += a.consec0;
    rec.consecutive_query_match_colmean += a.consecm;
  }
  const double scale = 100.0 / static_cast<double>(n);
  rec.query_logit_match *= scale;
  rec.query_logit_match_colmean *= scale;
  rec.query_sat_clause_fraction *= scale;
  rec.query_sat_clause_fraction_colmean *= scale;
  rec.consecutive_query_match *= scale;
  rec.consecutive_query_match_colmean *= scale;
  rec.solved_fraction = er.solved_fraction;
  return rec;
}

void write_probe_csv(std::ostream& out, std::span<const ProbeRecord> rows) {
  out << "iteration,query_logit_match,query_sat_clause_fraction,consecutive_query_match,"
         "query_logit_match_colmean,query_sat_clause_fraction_colmean,"
         "consecutive_query_match_colmean,solved_fraction\n";
  for (const ProbeRecord& r : rows)
    out << r.iteration << ',' << format_percent(r.query_logit_match) << ','
        << format_percent(r.query_sat_clause_fraction) << ','
        << format_percent(r.consecutive_query_match) << ','
        << format_percent(r.query_logit_match_colmean) << ','
        << format_percent(r.query_sat_clause_fraction_colmean) << ','
        << format_percent(r.consecutive_query_match_colmean) << ','
        << format_percent(r.solved_fraction * 100.0) << '\n';
}

}  // namespace qsat
