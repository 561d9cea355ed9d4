#include "qsat/gen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "qsat/error.hpp"

namespace qsat {
namespace {

SolveStatus oracle(const CnfFormula& f, std::int64_t decisions) {
  SearchBudget budget;
  budget.max_decisions = decisions;
  return dpll_solve(f, budget).status;
}

// k distinct variables from 1..n via a partial shuffle; exactly k draws.
void sample_vars(int n, int k, Rng& rng, std::vector<std::int32_t>& out) {
  out.resize(static_cast<std::size_t>(n));
  std::iota(out.begin(), out.end(), 1);
  for (int i = 0; i < k; ++i) {
    const int j = static_cast<int>(rng.uniform_int(i, n - 1));
    std::swap(out[static_cast<std::size_t>(i)], out[static_cast<std::size_t>(j)]);
  }
  out.resize(static_cast<std::size_t>(k));
}

void append_random_clause(CnfFormula& f, int width, Rng& rng,
                          std::vector<std::int32_t>& scratch) {
  sample_vars(f.num_vars, width, rng, scratch);
  std::vector<Lit> clause;
  clause.reserve(scratch.size());
  for (std::int32_t v : scratch) clause.push_back(rng.bernoulli(0.5) ? -v : v);
  f.clauses.push_back(std::move(clause));
}

}  // namespace

const char* task_name(Task t) {
  switch (t) {
    case Task::kKsat: return "ksat";
    case Task::k3Sat: return "3sat";
    case Task::k3Clique: return "3clique";
    case Task::kKColoring: return "kcoloring";
  }
  throw ConfigError("unknown task enum value");
}

Task parse_task(const std::string& name) {
  if (name == "ksat") return Task::kKsat;
  if (name == "3sat") return Task::k3Sat;
  if (name == "3clique") return Task::k3Clique;
  if (name == "kcoloring") return Task::kKColoring;
  throw ConfigError("unknown task '" + name + "' (expected ksat, 3sat, 3clique, or kcoloring)");
}

void GenSpec::validate() const {
  const int floor_size = (task == Task::kKsat) ? 3 : (task == Task::k3Sat) ? 5 : 3;
  if (min_size < floor_size)
    throw ConfigError(std::string("min_size for task ") + task_name(task) + " must be at least " +
                      std::to_string(floor_size));
  if (max_size < min_size) throw ConfigError("max_size must be >= min_size");
  if (count <= 0) throw ConfigError("count must be positive");
}

Graph gen_er_graph(int v, double p, Rng& rng) {
  Graph g;
  g.v = v;
  for (std::int32_t u = 1; u <= v; ++u)
    for (std::int32_t w = u + 1; w <= v; ++w)
      if (rng.bernoulli(p)) g.edges.emplace_back(u, w);
  return g;
}

bool graph_connected(const Graph& g) {
  if (g.v <= 1) return true;
  std::vector<std::vector<std::int32_t>> adj(static_cast<std::size_t>(g.v) + 1);
  for (auto [u, w] : g.edges) {
    adj[static_cast<std::size_t>(u)].push_back(w);
    adj[static_cast<std::size_t>(w)].push_back(u);
  }
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(g.v) + 1, 0);
  std::vector<std::int32_t> stack{1};
  seen[1] = 1;
  std::int32_t reached = 1;
  while (!stack.empty()) {
    const std::int32_t u = stack.back();
    stack.pop_back();
    for (std::int32_t w : adj[static_cast<std::size_t>(u)]) {
      if (!seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = 1;
        ++reached;
        stack.push_back(w);
      }
    }
  }
  return reached == g.v;
}

double clique_edge_probability(int v) {
  const double d = static_cast<double>(v) * (2.0 - 3.0 * v + static_cast<double>(v) * v);
  return std::cbrt(3.0) / std::cbrt(d);
}

double coloring_edge_probability(int v) { return 1.2 * std::log(static_cast<double>(v)) / v + 0.05; }

CnfFormula encode_kclique(const Graph& g, int k) {
  const std::int32_t v = g.v;
  std::vector<std::vector<std::uint8_t>> adj(
      static_cast<std::size_t>(v) + 1, std::vector<std::uint8_t>(static_cast<std::size_t>(v) + 1, 0));
  for (auto [a, b] : g.edges) {
    adj[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = 1;
    adj[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = 1;
  }
  const auto x = [v](std::int32_t slot, std::int32_t u) -> Lit { return (slot - 1) * v + u; };

  CnfFormula f;
  f.num_vars = k * v;
  // Every slot holds some vertex.
  for (std::int32_t s = 1; s <= k; ++s) {
    std::vector<Lit> clause;
    clause.reserve(static_cast<std::size_t>(v));
    for (std::int32_t u = 1; u <= v; ++u) clause.push_back(x(s, u));
    f.clauses.push_back(std::move(clause));
  }
  // No slot holds two vertices.
  for (std::int32_t s = 1; s <= k; ++s)
    for (std::int32_t u = 1; u <= v; ++u)
      for (std::int32_t w = u + 1; w <= v; ++w) f.clauses.push_back({-x(s, u), -x(s, w)});
  // Distinct slots never hold non-adjacent vertices, in either placement.
  for (std::int32_t s = 1; s <= k; ++s)
    for (std::int32_t t = s + 1; t <= k; ++t)
      for (std::int32_t u = 1; u <= v; ++u)
        for (std::int32_t w = 1; w <= v; ++w) {
          if (u == w || adj[static_cast<std::size_t>(u)][static_cast<std::size_t>(w)]) continue;
          f.clauses.push_back({-x(s, u), -x(t, w)});
        }
  // No vertex fills two slots.
  for (std::int32_t s = 1; s <= k; ++s)
    for (std::int32_t t = s + 1; t <= k; ++t)
      for (std::int32_t u = 1; u <= v; ++u) f.clauses.push_back({-x(s, u), -x(t, u)});
  return f;
}

CnfFormula encode_kcoloring(const Graph& g, int k) {
  const auto x = [k](std::int32_t u, std::int32_t c) -> Lit { return (u - 1) * k + c; };
  CnfFormula f;
  f.num_vars = g.v * k;
  // Every vertex takes some color.
  for (std::int32_t u = 1; u <= g.v; ++u) {
    std::vector<Lit> clause;
    clause.reserve(static_cast<std::size_t>(k));
    for (std::int32_t c = 1; c <= k; ++c) clause.push_back(x(u, c));
    f.clauses.push_back(std::move(clause));
  }
  // No vertex takes two colors.
  for (std::int32_t u = 1; u <= g.v; ++u)
    for (std::int32_t c = 1; c <= k; ++c)
      for (std::int32_t d = c + 1; d <= k; ++d) f.clauses.push_back({-x(u, c), -x(u, d)});
  // Adjacent vertices never share a color.
  for (auto [u, w] : g.edges)
    for (std::int32_t c = 1; c <= k; ++c) f.clauses.push_back({-x(u, c), -x(w, c)});
  return f;
}

std::optional<CnfFormula> gen_ksat(int num_vars, Rng& rng, std::int64_t oracle_decisions) {
  CnfFormula f;
  f.num_vars = num_vars;
  const std::size_t clause_cap = static_cast<std::size_t>(100) * static_cast<std::size_t>(num_vars);
  std::vector<std::int32_t> scratch;
  while (f.clauses.size() < clause_cap) {
    int width = 1 + (rng.bernoulli(0.7) ? 1 : 0) + static_cast<int>(rng.geometric_trials(0.4));
    width = std::min(width, num_vars);
    append_random_clause(f, width, rng, scratch);
    const SolveStatus status = oracle(f, oracle_decisions);
    if (status == SolveStatus::kUnknown) return std::nullopt;
    if (status == SolveStatus::kUnsat) {
      f.clauses.pop_back();
      return f;
    }
  }
  return f;  // pathologically easy draw; every prefix stayed satisfiable
}

int phase_clause_count(int num_vars) {
  const double n = static_cast<double>(num_vars);
  return static_cast<int>(std::floor(4.258 * n + 58.26 * std::pow(n, -2.0 / 3.0) + 0.5));
}

CnfFormula gen_3sat_phase(int num_vars, Rng& rng) {
  CnfFormula f;
  f.num_vars = num_vars;
  const int m = phase_clause_count(num_vars);
  std::vector<std::int32_t> scratch;
  for (int i = 0; i < m; ++i) append_random_clause(f, 3, rng, scratch);
  return f;
}

std::vector<std::pair<CnfFormula, std::uint64_t>> gen_instances(const GenSpec& spec,
                                                                std::int64_t oracle_decisions,
                                                                GenStats* stats) {
  spec.validate();
  GenStats local;
  GenStats& st = stats ? *stats : local;

  // A draw pool this lopsided means the oracle budget cannot label the
  // requested sizes; give the caller a diagnosis instead of spinning.
  const auto check_stalled = [&st, &spec]() {
    if (st.candidates >= 200 &&
        st.rejected_undecided * 100 > st.candidates * 95)
      throw DataError(std::string("generation stalled for task ") + task_name(spec.task) + ": " +
                      std::to_string(st.rejected_undecided) + " of " +
                      std::to_string(st.candidates) +
                      " candidates exhausted the solver budget; raise the budget or shrink sizes");
  };

  std::vector<std::pair<CnfFormula, std::uint64_t>> out;
  out.reserve(static_cast<std::size_t>(spec.count));
  for (std::int64_t i = 0; i < spec.count; ++i) {
    const std::uint64_t instance_seed = fold_seed(spec.seed, static_cast<std::uint64_t>(i));
    Rng rng(instance_seed);
    constexpr std::int64_t kAttemptCap = 100'000;
    bool done = false;
    for (std::int64_t attempt = 0; attempt < kAttemptCap && !done; ++attempt) {
      ++st.candidates;
      const int size = static_cast<int>(rng.uniform_int(spec.min_size, spec.max_size));
      switch (spec.task) {
        case Task::kKsat: {
          auto f = gen_ksat(size, rng, oracle_decisions);
          if (!f) {
            ++st.rejected_undecided;
            break;
          }
          out.emplace_back(std::move(*f), instance_seed);
          done = true;
          break;
        }
        case Task::k3Sat: {
          CnfFormula f = gen_3sat_phase(size, rng);
          const SolveStatus status = oracle(f, oracle_decisions);
          if (status == SolveStatus::kSat) {
            out.emplace_back(std::move(f), instance_seed);
            done = true;
          } else if (status == SolveStatus::kUnsat) {
            ++st.rejected_unsat;
          } else {
            ++st.rejected_undecided;
          }
          break;
        }
        case Task::k3Clique:
        case Task::kKColoring: {
          const bool coloring = spec.task == Task::kKColoring;
          const double p =
              coloring ? coloring_edge_probability(size) : clique_edge_probability(size);
          const Graph g = gen_er_graph(size, p, rng);
          if (coloring && !graph_connected(g)) {
            ++st.rejected_disconnected;
            break;
          }
          const int k = coloring ? 3 + static_cast<int>(rng.uniform_int(0, 2)) : 3;
          const CnfFormula f = coloring ? encode_kcoloring(g, k) : encode_kclique(g, k);
          const SolveStatus status = oracle(f, oracle_decisions);
          if (status == SolveStatus::kSat) {
            out.emplace_back(f, instance_seed);
            done = true;
          } else if (status == SolveStatus::kUnsat) {
            ++st.rejected_unsat;
          } else {
            ++st.rejected_undecided;
          }
          break;
        }
      }
      check_stalled();
    }
    if (!done)
      throw DataError(std::string("generation for task ") + task_name(spec.task) + " instance " +
                      std::to_string(i) + " found no satisfiable draw within the attempt cap");
  }
  return out;
}

DatasetManifest gen_dataset(const GenSpec& spec, const std::string& out_dir,
                            std::int64_t oracle_decisions) {
  GenStats stats;
  auto instances = gen_instances(spec, oracle_decisions, &stats);

  DatasetManifest manifest;
  manifest.task = task_name(spec.task);
  manifest.seed = spec.seed;
  manifest.min_size = spec.min_size;
  manifest.max_size = spec.max_size;
  manifest.rejected_unsat = stats.rejected_unsat;
  manifest.rejected_undecided = stats.rejected_undecided;
  manifest.rejected_disconnected = stats.rejected_disconnected;

  std::vector<CnfFormula> formulas;
  formulas.reserve(instances.size());
  for (auto& [f, seed] : instances) {
    DatasetEntry entry;
    entry.task = manifest.task;
    entry.seed = seed;
    manifest.instances.push_back(std::move(entry));
    formulas.push_back(std::move(f));
  }
  return save_dataset(out_dir, std::move(manifest), formulas);
}

}  // namespace qsat
