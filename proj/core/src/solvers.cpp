#include "qsat/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cstddef>

#include "qsat/error.hpp"

namespace qsat {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Internal literal code: 2*(var-1) + (negated ? 1 : 0). code^1 is the complement.
int lit_code(Lit lit) { return 2 * (lit_var(lit) - 1) + (lit_negated(lit) ? 1 : 0); }

// ---------------------------------------------------------------------------
// DPLL

struct Dpll {
  int nvars = 0;
  std::vector<int> lits;         // clause literals, flat; slots 0,1 of each clause are watched
  std::vector<int> clause_off;   // clause c spans lits[clause_off[c] .. clause_off[c+1])
  std::vector<std::vector<int>> watches;  // per literal code: clauses watching it
  std::vector<std::int8_t> value;         // per 0-based var: -1 unassigned, 0 false, 1 true
  std::vector<int> trail;                 // literal codes asserted true, in order
  std::size_t qhead = 0;

  std::int64_t decisions = 0;
  std::int64_t max_decisions = 0;
  double wall_limit = 0.0;
  Clock::time_point start;
  bool out_of_time = false;

  // occurrence counts among currently unsatisfied clauses, rebuilt per sweep
  std::vector<int> occ;

  // -1 false, 0 unassigned, 1 true
  int lit_val(int code) const {
    std::int8_t v = value[code >> 1];
    if (v < 0) return 0;
    bool t = (code & 1) ? (v == 0) : (v == 1);
    return t ? 1 : -1;
  }

  void assign(int code) {
    value[code >> 1] = (code & 1) ? 0 : 1;
    trail.push_back(code);
  }

  void undo_to(std::size_t mark) {
    while (trail.size() > mark) {
      value[trail.back() >> 1] = -1;
      trail.pop_back();
    }
    qhead = mark;
  }

  // Two-watched-literal propagation; false on conflict.
  bool propagate() {
    while (qhead < trail.size()) {
      int p = trail[qhead++];
      int fl = p ^ 1;  // literal that just became false
      auto& wl = watches[fl];
      std::size_t i = 0, j = 0;
      bool conflict = false;
      for (; i < wl.size(); ++i) {
        int c = wl[i];
        int b = clause_off[c];
        if (lits[b] == fl) std::swap(lits[b], lits[b + 1]);
        int first = lits[b];
        if (lit_val(first) == 1) {  // clause already satisfied
          wl[j++] = c;
          continue;
        }
        int e = clause_off[c + 1];
        int k = b + 2;
        for (; k < e; ++k) {
          if (lit_val(lits[k]) != -1) break;
        }
        if (k < e) {  // move the watch to a non-false literal
          std::swap(lits[b + 1], lits[k]);
          watches[lits[b + 1]].push_back(c);
          continue;
        }
        wl[j++] = c;
        if (lit_val(first) == -1) {
          conflict = true;
          ++i;
          break;
        }
        assign(first);  // unit
      }
      for (; i < wl.size(); ++i) wl[j++] = wl[i];
      wl.resize(j);
      if (conflict) return false;
    }
    return true;
  }

  // One pass over all clauses: satisfaction check plus occurrence counts of
  // unassigned literals in unsatisfied clauses. Returns true if every clause
  // is satisfied.
  bool sweep() {
    std::fill(occ.begin(), occ.end(), 0);
    bool all_sat = true;
    for (std::size_t c = 0; c + 1 < clause_off.size(); ++c) {
      int b = clause_off[c], e = clause_off[c + 1];
      bool sat = false;
      for (int k = b; k < e; ++k) {
        if (lit_val(lits[k]) == 1) {
          sat = true;
          break;
        }
      }
      if (sat) continue;
      all_sat = false;
      for (int k = b; k < e; ++k) {
        if (lit_val(lits[k]) == 0) ++occ[lits[k]];
      }
    }
    return all_sat;
  }

  SolveStatus search() {
    if (!propagate()) return SolveStatus::kUnsat;
    bool all_sat;
    while (true) {
      all_sat = sweep();
      if (all_sat) return SolveStatus::kSat;
      // pure literals: occur in one polarity only among unsatisfied clauses
      bool any_pure = false;
      for (int v = 0; v < nvars; ++v) {
        if (value[v] >= 0) continue;
        int p = occ[2 * v], n = occ[2 * v + 1];
        if (p > 0 && n == 0) {
          assign(2 * v);
          any_pure = true;
        } else if (n > 0 && p == 0) {
          assign(2 * v + 1);
          any_pure = true;
        }
      }
      if (!any_pure) break;
      if (!propagate()) return SolveStatus::kUnsat;
    }
    // branch on the most frequent unassigned variable (ties: lowest index)
    int best_v = -1, best_occ = -1;
    for (int v = 0; v < nvars; ++v) {
      if (value[v] >= 0) continue;
      int tot = occ[2 * v] + occ[2 * v + 1];
      if (tot > best_occ) {
        best_occ = tot;
        best_v = v;
      }
    }
    if (++decisions > max_decisions) return SolveStatus::kUnknown;
    if (wall_limit > 0 && (decisions & 4095) == 0 && seconds_since(start) > wall_limit) {
      out_of_time = true;
      return SolveStatus::kUnknown;
    }
    std::size_t mark = trail.size();
    assign(2 * best_v);  // positive polarity first
    SolveStatus pos = search();
    if (pos == SolveStatus::kSat) return pos;
    undo_to(mark);
    if (out_of_time) return SolveStatus::kUnknown;
    assign(2 * best_v + 1);
    SolveStatus neg = search();
    if (neg == SolveStatus::kSat) return neg;
    undo_to(mark);
    if (pos == SolveStatus::kUnknown || neg == SolveStatus::kUnknown) return SolveStatus::kUnknown;
    return SolveStatus::kUnsat;
  }
};

// ---------------------------------------------------------------------------
// GSAT

struct Gsat {
  const CnfFormula& f;
  int nvars;
  std::vector<std::uint8_t> value;  // per 0-based var
  std::vector<int> numtrue;         // satisfied literals per clause
  std::vector<std::vector<int>> occ;  // per var: clause indices (deduplicated)
  std::vector<int> score;             // make - break per var
  int unsat_count = 0;

  explicit Gsat(const CnfFormula& formula) : f(formula), nvars(formula.num_vars) {
    value.assign(nvars, 0);
    numtrue.assign(f.clauses.size(), 0);
    occ.resize(nvars);
    score.assign(nvars, 0);
    std::vector<int> seen(nvars, -1);
    for (std::size_t c = 0; c < f.clauses.size(); ++c) {
      for (Lit lit : f.clauses[c]) {
        int v = lit_var(lit) - 1;
        if (seen[v] != static_cast<int>(c)) {
          seen[v] = static_cast<int>(c);
          occ[v].push_back(static_cast<int>(c));
        }
      }
    }
  }

  bool lit_true(Lit lit) const {
    return lit_negated(lit) ? value[lit_var(lit) - 1] == 0 : value[lit_var(lit) - 1] == 1;
  }

  int count_true(int c) const {
    int t = 0;
    for (Lit lit : f.clauses[c]) t += lit_true(lit) ? 1 : 0;
    return t;
  }

  // Add (sign=+1) or retract (sign=-1) clause c's make/break contributions.
  void adjust(int c, int sign) {
    int t = numtrue[c];
    if (t == 0) {
      for (Lit lit : f.clauses[c]) score[lit_var(lit) - 1] += sign;  // make
    } else if (t == 1) {
      for (Lit lit : f.clauses[c]) {
        if (lit_true(lit)) {
          score[lit_var(lit) - 1] -= sign;  // break
          break;
        }
      }
    }
  }

  void reset(Rng& rng) {
    for (int v = 0; v < nvars; ++v) value[v] = static_cast<std::uint8_t>(rng.uniform_int(0, 1));
    std::fill(score.begin(), score.end(), 0);
    unsat_count = 0;
    for (std::size_t c = 0; c < f.clauses.size(); ++c) {
      numtrue[c] = count_true(static_cast<int>(c));
      if (numtrue[c] == 0) ++unsat_count;
      adjust(static_cast<int>(c), +1);
    }
  }

  void flip(int v) {
    for (int c : occ[v]) adjust(c, -1);
    value[v] ^= 1;
    for (int c : occ[v]) {
      int t = count_true(c);
      if (numtrue[c] == 0 && t > 0) --unsat_count;
      if (numtrue[c] > 0 && t == 0) ++unsat_count;
      numtrue[c] = t;
      adjust(c, +1);
    }
  }

  // From-scratch recount; throws on bookkeeping divergence.
  void recount_check() const {
    int uc = 0;
    for (std::size_t c = 0; c < f.clauses.size(); ++c) {
      int t = count_true(static_cast<int>(c));
      if (t != numtrue[c]) throw Error("gsat bookkeeping mismatch: clause true-count drifted");
      if (t == 0) ++uc;
    }
    if (uc != unsat_count) throw Error("gsat bookkeeping mismatch: unsat count drifted");
  }
};

}  // namespace

SolveResult gsat_solve(const CnfFormula& f, const SearchBudget& budget, Rng& rng) {
  f.validate();
  if (budget.max_flips <= 0 || budget.max_tries <= 0)
    throw ConfigError("gsat budget must be positive");
  auto start = Clock::now();
  SolveResult res;
  Gsat g(f);
  for (int t = 0; t < budget.max_tries; ++t) {
    res.tries = t + 1;
    g.reset(rng);
    for (std::int64_t k = 0; k < budget.max_flips; ++k) {
      if (g.unsat_count == 0) {
        res.status = SolveStatus::kSat;
        res.assignment = g.value;
        res.wall_seconds = seconds_since(start);
        return res;
      }
      // best score over all variables, ties uniform at random
      int best = g.score[0], pick = 0, ties = 1;
      for (int v = 1; v < g.nvars; ++v) {
        if (g.score[v] > best) {
          best = g.score[v];
          pick = v;
          ties = 1;
        } else if (g.score[v] == best && rng.uniform_int(0, ties++) == 0) {
          pick = v;
        }
      }
      g.flip(pick);
      ++res.flips;
      if (budget.paranoid && res.flips % 1000 == 0) g.recount_check();
      if (budget.wall_limit_seconds > 0 && (res.flips & 1023) == 0 &&
          seconds_since(start) > budget.wall_limit_seconds) {
        res.wall_seconds = seconds_since(start);
        return res;
      }
    }
    if (g.unsat_count == 0) {  // last flip of the try may have finished it
      res.status = SolveStatus::kSat;
      res.assignment = g.value;
      break;
    }
  }
  res.wall_seconds = seconds_since(start);
  return res;
}

SolveResult dpll_solve(const CnfFormula& f, const SearchBudget& budget) {
  f.validate();
  if (budget.max_decisions <= 0) throw ConfigError("dpll budget must be positive");
  auto start = Clock::now();
  SolveResult res;

  Dpll d;
  d.nvars = f.num_vars;
  d.value.assign(f.num_vars, -1);
  d.occ.assign(2 * f.num_vars, 0);
  d.watches.resize(2 * f.num_vars);
  d.max_decisions = budget.max_decisions;
  d.wall_limit = budget.wall_limit_seconds;
  d.start = start;

  d.clause_off.push_back(0);
  bool root_conflict = false;
  for (const Clause& cl : f.clauses) {
    if (cl.size() == 1) {  // unit at the root; too short to watch
      int code = lit_code(cl[0]);
      int v = d.lit_val(code);
      if (v == -1) root_conflict = true;
      else if (v == 0) d.assign(code);
      continue;
    }
    for (Lit lit : cl) d.lits.push_back(lit_code(lit));
    d.clause_off.push_back(static_cast<int>(d.lits.size()));
    int c = static_cast<int>(d.clause_off.size()) - 2;
    d.watches[d.lits[d.clause_off[c]]].push_back(c);
    d.watches[d.lits[d.clause_off[c] + 1]].push_back(c);
  }

  SolveStatus st = root_conflict ? SolveStatus::kUnsat : d.search();
  res.status = st;
  res.decisions = d.decisions;
  if (st == SolveStatus::kSat) {
    res.assignment.assign(f.num_vars, 1);  // variables free at the leaf: any value works
    for (int v = 0; v < f.num_vars; ++v) {
      if (d.value[v] >= 0) res.assignment[v] = static_cast<std::uint8_t>(d.value[v]);
    }
    if (!check_assignment(f, res.assignment).satisfied)
      throw Error("dpll produced a non-satisfying witness");
  }
  res.wall_seconds = seconds_since(start);
  return res;
}

}  // namespace qsat
