#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace qsat {

// A literal is a nonzero signed integer: magnitude is the 1-based variable
// index, sign is the polarity. Same convention as DIMACS.
using Lit = std::int32_t;

inline std::int32_t lit_var(Lit l) { return l > 0 ? l : -l; }
inline bool lit_negated(Lit l) { return l < 0; }

using Clause = std::vector<Lit>;

// CNF formula over variables 1..num_vars. Clauses are nonempty and contain
// no duplicate literals; a variable may occur in both polarities within one
// clause (tautology), the type permits it even though generators never
// produce one.
struct CnfFormula {
  std::int32_t num_vars = 0;
  std::vector<Clause> clauses;

  std::int32_t num_clauses() const { return static_cast<std::int32_t>(clauses.size()); }
  std::int64_t literal_count() const;

  // Throws DataError if a clause is empty or a literal is out of range.
  void validate() const;

  bool operator==(const CnfFormula&) const = default;
};

// Parses DIMACS CNF: `c` comment lines, one `p cnf <n> <m>` header, then m
// zero-terminated clause lines. Duplicate literals inside a clause are
// dropped (first occurrence kept). Throws ParseError naming the line on a
// malformed header, an out-of-range literal, an empty clause, or a clause
// count mismatch.
CnfFormula parse_dimacs(std::istream& in);
CnfFormula parse_dimacs(const std::string& text);
CnfFormula parse_dimacs_file(const std::string& path);

void write_dimacs(const CnfFormula& f, std::ostream& out);
std::string write_dimacs(const CnfFormula& f);
void write_dimacs_file(const CnfFormula& f, const std::string& path);

// Relaxed assignment: one real in [0,1] per variable. Discretization maps
// each value to the nearest of {0,1}; exactly 0.5 rounds to 1.
inline bool round_to_bool(double v) { return v >= 0.5; }

std::vector<std::uint8_t> round_assignment(std::span<const float> values);
std::vector<std::uint8_t> round_assignment(std::span<const double> values);

struct ClauseCheck {
  std::vector<std::uint8_t> clause_satisfied;  // one flag per clause
  bool satisfied = false;                      // conjunction of the flags
};

// Evaluates the discretized assignment clause by clause. Throws ShapeError
// if the assignment length differs from num_vars.
ClauseCheck check_assignment(const CnfFormula& f, std::span<const std::uint8_t> rounded);
ClauseCheck check_assignment(const CnfFormula& f, std::span<const float> values);
ClauseCheck check_assignment(const CnfFormula& f, std::span<const double> values);

}  // namespace qsat
