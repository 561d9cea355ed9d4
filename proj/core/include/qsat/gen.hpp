#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qsat/cnf.hpp"
#include "qsat/dataset.hpp"
#include "qsat/rng.hpp"
#include "qsat/solvers.hpp"

namespace qsat {

enum class Task { kKsat, k3Sat, k3Clique, kKColoring };

const char* task_name(Task t);
Task parse_task(const std::string& name);

struct GenSpec {
  Task task = Task::k3Sat;
  int min_size = 5;  // variables for SAT tasks, vertices for graph tasks
  int max_size = 20;
  std::int64_t count = 100;
  std::uint64_t seed = 1;

  void validate() const;
};

// Simple undirected graph; edges stored as u < w pairs in lexicographic
// order, no self-loops, no duplicates. Vertices are 1-based.
struct Graph {
  std::int32_t v = 0;
  std::vector<std::pair<std::int32_t, std::int32_t>> edges;
};

Graph gen_er_graph(int v, double p, Rng& rng);
bool graph_connected(const Graph& g);

// Edge probabilities the two graph tasks use, as functions of vertex count.
double clique_edge_probability(int v);    // 3^(1/3) / (v(2-3v+v^2))^(1/3)
double coloring_edge_probability(int v);  // 1.2·ln(v)/v + 0.05

// Slot-based clique encoding: variable (s-1)·v + u says slot s holds vertex
// u. Satisfiable iff the graph contains a k-clique.
CnfFormula encode_kclique(const Graph& g, int k);

// Color encoding: variable (u-1)·k + c says vertex u gets color c.
// Satisfiable iff the graph is k-colorable.
CnfFormula encode_kcoloring(const Graph& g, int k);

// Clause widths 1 + Bernoulli(0.7) + Geometric(0.4), capped at num_vars;
// clauses accumulate until the formula first turns unsatisfiable under the
// oracle, then the last clause is dropped. nullopt when the oracle budget
// ran out before the construction could be labeled.
std::optional<CnfFormula> gen_ksat(int num_vars, Rng& rng,
                                   std::int64_t oracle_decisions = 1'000'000);

// m = round-half-up(4.258·n + 58.26·n^(-2/3)) clauses of width exactly 3.
// Not satisfiability-filtered here; the dataset layer rejects UNSAT draws.
CnfFormula gen_3sat_phase(int num_vars, Rng& rng);
int phase_clause_count(int num_vars);

struct GenStats {
  std::int64_t candidates = 0;
  std::int64_t rejected_unsat = 0;
  std::int64_t rejected_undecided = 0;
  std::int64_t rejected_disconnected = 0;
};

// Rejection-samples spec.count oracle-verified satisfiable instances.
// Instance i draws everything from its own stream fold_seed(seed, i), so
// any parallel schedule produces the same dataset. Throws DataError when
// more than 95% of candidates exhaust the oracle budget.
std::vector<std::pair<CnfFormula, std::uint64_t>> gen_instances(
    const GenSpec& spec, std::int64_t oracle_decisions = 1'000'000, GenStats* stats = nullptr);

// gen_instances + dataset directory writing; returns the written manifest.
DatasetManifest gen_dataset(const GenSpec& spec, const std::string& out_dir,
                            std::int64_t oracle_decisions = 1'000'000);

}  // namespace qsat
