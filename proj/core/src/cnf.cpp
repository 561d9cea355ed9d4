#include "qsat/cnf.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "qsat/error.hpp"

namespace qsat {

std::int64_t CnfFormula::literal_count() const {
  std::int64_t total = 0;
  for (const auto& c : clauses) total += static_cast<std::int64_t>(c.size());
  return total;
}

void CnfFormula::validate() const {
  if (num_vars < 0) throw DataError("negative variable count");
  for (std::size_t ci = 0; ci < clauses.size(); ++ci) {
    const auto& c = clauses[ci];
    if (c.empty()) throw DataError("clause " + std::to_string(ci + 1) + " is empty");
    for (Lit l : c) {
      if (l == 0 || lit_var(l) > num_vars)
        throw DataError("clause " + std::to_string(ci + 1) + " has literal " +
                        std::to_string(l) + " out of range [1," +
                        std::to_string(num_vars) + "]");
    }
    for (std::size_t i = 0; i < c.size(); ++i)
      for (std::size_t j = i + 1; j < c.size(); ++j)
        if (c[i] == c[j])
          throw DataError("clause " + std::to_string(ci + 1) +
                          " repeats literal " + std::to_string(c[i]));
  }
}

CnfFormula parse_dimacs(std::istream& in) {
  CnfFormula f;
  std::int64_t declared_clauses = -1;
  std::string line;
  int line_no = 0;
  bool have_header = false;

  while (std::getline(in, line)) {
    ++line_no;
    // Strip trailing CR from files written on Windows.
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;  // blank line
    if (first == "c") continue;
    if (first.size() > 1 && first[0] == 'c') continue;  // "cfoo" style comment

    if (!have_header) {
      if (first != "p") throw ParseError("expected 'p cnf <vars> <clauses>' header", line_no);
      std::string fmt;
      std::int64_t n = -1, m = -1;
      if (!(ls >> fmt >> n >> m) || fmt != "cnf" || n < 1 || m < 0)
        throw ParseError("malformed header '" + line + "'", line_no);
      std::string extra;
      if (ls >> extra) throw ParseError("trailing tokens after header", line_no);
      f.num_vars = static_cast<std::int32_t>(n);
      declared_clauses = m;
      have_header = true;
      continue;
    }

    if (static_cast<std::int64_t>(f.clauses.size()) >= declared_clauses)
      throw ParseError("clause count mismatch: more than the declared " +
                           std::to_string(declared_clauses) + " clauses",
                       line_no);

    Clause clause;
    std::int64_t lit = 0;
    bool terminated = false;
    std::istringstream cs(line);
    while (cs >> lit) {
      if (lit == 0) {
        terminated = true;
        break;
      }
      const std::int64_t var = lit < 0 ? -lit : lit;
      if (var > f.num_vars)
        throw ParseError("literal " + std::to_string(var) +
                             " exceeds declared variable count " +
                             std::to_string(f.num_vars),
                         line_no);
      const Lit l = static_cast<Lit>(lit);
      if (std::find(clause.begin(), clause.end(), l) == clause.end())
        clause.push_back(l);
    }
    if (!terminated) {
      if (cs.fail() && !cs.eof()) throw ParseError("unexpected token in clause", line_no);
      throw ParseError("clause not terminated by 0", line_no);
    }
    if (clause.empty()) throw ParseError("empty clause", line_no);
    f.clauses.push_back(std::move(clause));
  }

  if (!have_header) throw ParseError("missing 'p cnf' header");
  if (static_cast<std::int64_t>(f.clauses.size()) != declared_clauses)
    throw ParseError("clause count mismatch: header declares " +
                     std::to_string(declared_clauses) + " clauses, found " +
                     std::to_string(f.clauses.size()));
  return f;
}

CnfFormula parse_dimacs(const std::string& text) {
  std::istringstream in(text);
  return parse_dimacs(in);
}

CnfFormula parse_dimacs_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return parse_dimacs(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
}

void write_dimacs(const CnfFormula& f, std::ostream& out) {
  out << "p cnf " << f.num_vars << ' ' << f.clauses.size() << '\n';
  for (const auto& c : f.clauses) {
    for (Lit l : c) out << l << ' ';
    out << "0\n";
  }
}

std::string write_dimacs(const CnfFormula& f) {
  std::ostringstream out;
  write_dimacs(f, out);
  return out.str();
}

void write_dimacs_file(const CnfFormula& f, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  write_dimacs(f, out);
  if (!out) throw IoError("short write to '" + path + "'");
}

namespace {

template <typename T>
std::vector<std::uint8_t> round_impl(std::span<const T> values) {
  std::vector<std::uint8_t> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    out[i] = round_to_bool(static_cast<double>(values[i])) ? 1 : 0;
  return out;
}

}  // namespace

std::vector<std::uint8_t> round_assignment(std::span<const float> values) {
  return round_impl(values);
}
std::vector<std::uint8_t> round_assignment(std::span<const double> values) {
  return round_impl(values);
}

ClauseCheck check_assignment(const CnfFormula& f, std::span<const std::uint8_t> rounded) {
  if (rounded.size() != static_cast<std::size_t>(f.num_vars))
    throw ShapeError("assignment length " + std::to_string(rounded.size()) +
                     " does not match variable count " + std::to_string(f.num_vars));
  ClauseCheck result;
  result.clause_satisfied.resize(f.clauses.size());
  result.satisfied = true;
  for (std::size_t ci = 0; ci < f.clauses.size(); ++ci) {
    bool sat = false;
    for (Lit l : f.clauses[ci]) {
      const bool value = rounded[static_cast<std::size_t>(lit_var(l)) - 1] != 0;
      if (value != lit_negated(l)) {
        sat = true;
        break;
      }
    }
    result.clause_satisfied[ci] = sat ? 1 : 0;
    result.satisfied = result.satisfied && sat;
  }
  return result;
}

ClauseCheck check_assignment(const CnfFormula& f, std::span<const float> values) {
  return check_assignment(f, std::span<const std::uint8_t>(round_assignment(values)));
}
ClauseCheck check_assignment(const CnfFormula& f, std::span<const double> values) {
  return check_assignment(f, std::span<const std::uint8_t>(round_assignment(values)));
}

}  // namespace qsat
