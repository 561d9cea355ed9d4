#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "qsat/checkpoint.hpp"
#include "qsat/dataset.hpp"
#include "qsat/error.hpp"
#include "qsat/gen.hpp"
#include "qsat/harness.hpp"
#include "qsat/solvers.hpp"
#include "qsat/theorem.hpp"
#include "qsat/train.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// Stamp beside every file-producing command: enough to rerun it exactly.
// Deliberately no wall-clock content, so reruns leave identical bytes.
void write_stamp(const fs::path& dir, const std::string& command, const json& args) {
  fs::create_directories(dir);
  json j;
  j["command"] = command;
  j["version"] = qsat::kVersion;
  j["args"] = args;
  std::ofstream out(dir / "stamp.json", std::ios::trunc);
  if (!out) throw qsat::IoError("cannot write stamp in '" + dir.string() + "'");
  out << j.dump(2) << '\n';
}

qsat::GradMode parse_grad_mode(const std::string& s) {
  if (s == "clause_sum") return qsat::GradMode::kClauseSum;
  if (s == "log") return qsat::GradMode::kLog;
  throw qsat::ConfigError("unknown query gradient mode '" + s + "' (expected clause_sum or log)");
}

const char* grad_mode_name(qsat::GradMode m) {
  return m == qsat::GradMode::kClauseSum ? "clause_sum" : "log";
}

std::ofstream open_out(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw qsat::IoError("cannot write '" + path.string() + "'");
  return out;
}

struct GenerateArgs {
  std::string task = "3sat";
  int min_size = 5;
  int max_size = 20;
  std::int64_t count = 100;
  std::uint64_t seed = 1;
  std::int64_t oracle_decisions = 1'000'000;
  std::string out;
};

int cmd_generate(const GenerateArgs& a) {
  qsat::GenSpec spec;
  spec.task = qsat::parse_task(a.task);
  spec.min_size = a.min_size;
  spec.max_size = a.max_size;
  spec.count = a.count;
  spec.seed = a.seed;
  qsat::DatasetManifest manifest = qsat::gen_dataset(spec, a.out, a.oracle_decisions);
  write_stamp(a.out, "generate",
              json{{"task", a.task},
                   {"min_size", a.min_size},
                   {"max_size", a.max_size},
                   {"count", a.count},
                   {"seed", a.seed},
                   {"oracle_decisions", a.oracle_decisions}});
  std::cout << "wrote " << manifest.instances.size() << " instances to " << a.out << " (rejected "
            << manifest.rejected_unsat << " unsat, " << manifest.rejected_undecided
            << " undecided, " << manifest.rejected_disconnected << " disconnected)\n";
  return 0;
}

struct TrainArgs {
  std::string train_dir;
  std::string val_dir;
  std::string out;
  std::string arch = "querysat";
  int d = 128;
  int r = 4;
  int u = 8;
  double alpha = 0.2;
  std::string query_grad = "clause_sum";
  bool noise_per_pass = false;
  double lr = 2e-4;
  int steps_train = 32;
  int steps_eval = 64;
  std::int64_t iterations = 1000;
  std::int64_t node_budget = 20'000;
  std::uint64_t seed = 1;
  std::int64_t val_interval = 100;
  bool trail = false;
  std::string resume;
};

int cmd_train(const TrainArgs& a) {
  qsat::Dataset train_set = qsat::load_dataset(a.train_dir);
  qsat::Dataset val_set = qsat::load_dataset(a.val_dir);

  qsat::TrainConfig tc;
  tc.learning_rate = a.lr;
  tc.s_train = a.steps_train;
  tc.s_test = a.steps_eval;
  tc.iterations = a.iterations;
  tc.node_budget = a.node_budget;
  tc.seed = a.seed;
  tc.validation_interval = a.val_interval;

  qsat::TrainState state = [&] {
    if (!a.resume.empty()) {
      qsat::Checkpoint ck = qsat::load_checkpoint(a.resume);
      std::cout << "resuming from " << a.resume << " at iteration " << ck.iteration
                << " (stored model config overrides flags)\n";
      return qsat::training_from_checkpoint(ck, tc);
    }
    qsat::ModelConfig mc;
    mc.architecture = qsat::parse_architecture(a.arch);
    mc.d = a.d;
    mc.r = a.r;
    mc.u = a.u;
    mc.alpha = static_cast<float>(a.alpha);
    mc.query_grad_mode = parse_grad_mode(a.query_grad);
    mc.noise_per_pass = a.noise_per_pass;
    return qsat::init_training(mc, tc);
  }();

  const fs::path out_dir(a.out);
  fs::create_directories(out_dir);
  if (a.trail) fs::create_directories(out_dir / "trail");

  auto on_row = [&](const qsat::MetricsRow& row) {
    if (row.has_validation) {
      std::cout << "iteration " << row.iteration << " loss " << row.loss << " val "
                << row.val_solved_fraction << '\n';
      if (a.trail) {
        char name[32];
        std::snprintf(name, sizeof(name), "ckpt_%08lld.qsc",
                      static_cast<long long>(row.iteration));
        qsat::save_checkpoint((out_dir / "trail" / name).string(),
                              qsat::make_checkpoint(state));
      }
    }
  };
  std::vector<qsat::MetricsRow> rows =
      qsat::train(state, train_set.formulas, val_set.formulas, tc, on_row);

  {
    std::ofstream csv = open_out(out_dir / "metrics.csv");
    qsat::write_metrics_csv(csv, rows);
  }
  qsat::save_checkpoint((out_dir / "checkpoint.qsc").string(), qsat::make_checkpoint(state));
  write_stamp(out_dir, "train",
              json{{"train_dir", a.train_dir},
                   {"val_dir", a.val_dir},
                   {"arch", a.resume.empty() ? a.arch
                                             : qsat::architecture_name(
                                                   state.model.config().architecture)},
                   {"d", state.model.config().d},
                   {"r", state.model.config().r},
                   {"u", state.model.config().u},
                   {"alpha", state.model.config().alpha},
                   {"query_grad", grad_mode_name(state.model.config().query_grad_mode)},
                   {"noise_per_pass", state.model.config().noise_per_pass},
                   {"lr", a.lr},
                   {"steps_train", a.steps_train},
                   {"steps_eval", a.steps_eval},
                   {"iterations", a.iterations},
                   {"node_budget", a.node_budget},
                   {"seed", a.seed},
                   {"val_interval", a.val_interval},
                   {"resume", a.resume}});
  if (!rows.empty() && rows.back().has_validation)
    std::cout << "final val solved fraction " << rows.back().val_solved_fraction << '\n';
  return 0;
}

struct EvalArgs {
  std::string checkpoint;
  std::string dataset;
  int steps = 64;
  std::int64_t node_budget = 20'000;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_eval(const EvalArgs& a) {
  qsat::Checkpoint ck = qsat::load_checkpoint(a.checkpoint);
  qsat::Model model = qsat::model_from_checkpoint(ck);
  qsat::Dataset ds = qsat::load_dataset(a.dataset);
  qsat::EvalResult er = qsat::evaluate(model, ds.formulas, {}, a.steps, a.node_budget,
                                       qsat::fold_seed(a.seed, 3));

  std::ofstream csv = open_out(fs::path(a.out) / "eval.csv");
  csv << "instance,file,n,m,solved,exit_step\n";
  for (std::size_t i = 0; i < ds.formulas.size(); ++i) {
    const qsat::DatasetEntry& e = ds.manifest.instances[i];
    csv << i << ',' << e.file << ',' << e.n << ',' << e.m << ','
        << static_cast<int>(er.solved[i]) << ',' << er.exit_step[i] << '\n';
  }
  char frac[32];
  std::snprintf(frac, sizeof(frac), "%.6f", er.solved_fraction);
  write_stamp(a.out, "eval",
              json{{"checkpoint", a.checkpoint},
                   {"dataset", a.dataset},
                   {"steps", a.steps},
                   {"node_budget", a.node_budget},
                   {"seed", a.seed},
                   {"solved_fraction", frac}});
  std::cout << "solved fraction " << frac << " over " << ds.formulas.size() << " instances\n";
  return 0;
}

struct SolveArgs {
  std::string solver;
  std::int64_t max_flips = 50'000;
  int tries = 10;
  std::int64_t decisions = 1'000'000;
  std::uint64_t seed = 1;
  std::string file;
};

int cmd_solve(const SolveArgs& a) {
  qsat::CnfFormula f = qsat::parse_dimacs_file(a.file);
  qsat::SearchBudget budget;
  budget.max_flips = a.max_flips;
  budget.max_tries = a.tries;
  budget.max_decisions = a.decisions;

  qsat::SolveResult result;
  if (a.solver == "gsat") {
    qsat::Rng rng(a.seed);
    result = qsat::gsat_solve(f, budget, rng);
  } else if (a.solver == "dpll") {
    result = qsat::dpll_solve(f, budget);
  } else {
    throw qsat::ConfigError("unknown solver '" + a.solver + "' (expected gsat or dpll)");
  }

  switch (result.status) {
    case qsat::SolveStatus::kSat: std::cout << "s SATISFIABLE\n"; break;
    case qsat::SolveStatus::kUnsat: std::cout << "s UNSATISFIABLE\n"; break;
    case qsat::SolveStatus::kUnknown: std::cout << "s UNKNOWN\n"; break;
  }
  if (result.status == qsat::SolveStatus::kSat) {
    std::cout << 'v';
    for (std::int32_t v = 1; v <= f.num_vars; ++v)
      std::cout << ' ' << (result.assignment[static_cast<std::size_t>(v - 1)] ? v : -v);
    std::cout << " 0\n";
  }
  char wall[32];
  std::snprintf(wall, sizeof(wall), "%.3f", result.wall_seconds);
  std::cout << "c flips=" << result.flips << " decisions=" << result.decisions
            << " tries=" << result.tries << " wall_seconds=" << wall << '\n';
  return 0;
}

struct BenchArgs {
  std::string dataset;
  std::string solvers = "querysat,gsat,dpll";
  std::string checkpoint;
  qsat::BenchLimits limits;
  std::string out;
};

int cmd_bench(const BenchArgs& a) {
  qsat::Dataset ds = qsat::load_dataset(a.dataset);

  std::vector<std::string> names;
  for (std::size_t pos = 0; pos < a.solvers.size();) {
    std::size_t comma = a.solvers.find(',', pos);
    if (comma == std::string::npos) comma = a.solvers.size();
    if (comma > pos) names.push_back(a.solvers.substr(pos, comma - pos));
    pos = comma + 1;
  }
  if (names.empty()) throw qsat::ConfigError("no solvers named");

  qsat::Model model = [&] {
    const bool needs_model =
        std::find(names.begin(), names.end(), "querysat") != names.end();
    if (!needs_model) {
      qsat::Rng dummy(0);
      qsat::ModelConfig tiny;
      tiny.d = 1;
      tiny.u = 1;
      return qsat::Model(tiny, dummy);
    }
    if (a.checkpoint.empty())
      throw qsat::ConfigError("benchmarking querysat needs --checkpoint");
    return qsat::model_from_checkpoint(qsat::load_checkpoint(a.checkpoint));
  }();

  std::vector<qsat::BenchRecord> records;
  for (const std::string& name : names) {
    std::vector<qsat::BenchRecord> part =
        qsat::bench_solver(name, ds.formulas, name == "querysat" ? &model : nullptr, a.limits);
    records.insert(records.end(), part.begin(), part.end());
    std::int64_t solved = 0;
    for (const qsat::BenchRecord& r : part)
      if (r.status == "sat" || r.status == "unsat") ++solved;
    std::cout << name << ": decided " << solved << " of " << part.size() << '\n';
  }

  {
    std::ofstream csv = open_out(fs::path(a.out) / "records.csv");
    qsat::write_bench_csv(csv, records);
  }
  {
    std::vector<qsat::CactusRow> rows = qsat::cactus_series(records);
    std::ofstream csv = open_out(fs::path(a.out) / "cactus.csv");
    qsat::write_cactus_csv(csv, rows);
  }
  write_stamp(a.out, "bench",
              json{{"dataset", a.dataset},
                   {"solvers", a.solvers},
                   {"checkpoint", a.checkpoint},
                   {"querysat_steps", a.limits.querysat_steps},
                   {"gsat_flips_per_try", a.limits.gsat_flips_per_try},
                   {"gsat_tries", a.limits.gsat_tries},
                   {"dpll_decisions", a.limits.dpll_decisions},
                   {"node_budget", a.limits.node_budget},
                   {"seed", a.limits.seed},
                   {"budget_seconds", a.limits.budget_seconds},
                   {"workers", a.limits.workers},
                   {"time_model", "budget_fraction"}});
  return 0;
}

struct ProbeArgs {
  std::string trail;
  std::string dataset;
  int steps = 64;
  std::int64_t node_budget = 20'000;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_probe(const ProbeArgs& a) {
  qsat::Dataset ds = qsat::load_dataset(a.dataset);

  std::vector<fs::path> files;
  if (!fs::is_directory(a.trail)) throw qsat::IoError("'" + a.trail + "' is not a directory");
  for (const fs::directory_entry& e : fs::directory_iterator(a.trail))
    if (e.path().extension() == ".qsc") files.push_back(e.path());
  if (files.empty()) throw qsat::DataError("no .qsc checkpoints in '" + a.trail + "'");
  std::sort(files.begin(), files.end());

  std::vector<qsat::ProbeRecord> rows;
  for (const fs::path& p : files) {
    qsat::Checkpoint ck = qsat::load_checkpoint(p.string());
    qsat::Model model = qsat::model_from_checkpoint(ck);
    qsat::ProbeRecord rec = qsat::probe_model(model, ds.formulas, a.steps, a.node_budget,
                                              qsat::fold_seed(a.seed, 3));
    rec.iteration = ck.iteration;
    rows.push_back(rec);
    std::cout << "iteration " << rec.iteration << ": query_sat_clause_fraction "
              << rec.query_sat_clause_fraction << "% solved " << rec.solved_fraction << '\n';
  }
  std::sort(rows.begin(), rows.end(),
            [](const qsat::ProbeRecord& x, const qsat::ProbeRecord& y) {
              return x.iteration < y.iteration;
            });

  std::ofstream csv = open_out(fs::path(a.out) / "probe.csv");
  qsat::write_probe_csv(csv, rows);
  write_stamp(a.out, "probe",
              json{{"trail", a.trail},
                   {"dataset", a.dataset},
                   {"steps", a.steps},
                   {"node_budget", a.node_budget},
                   {"seed", a.seed},
                   {"query_column", "0 plus colmean twins"},
                   {"averaging", "steps, then instance, then across instances"}});
  return 0;
}

struct TheoremDemoArgs {
  std::string formula;
  std::int64_t h = 2;
};

int cmd_theorem_demo(const TheoremDemoArgs& a) {
  qsat::CnfFormula f = qsat::parse_dimacs_file(a.formula);
  qsat::RationalQuery query = qsat::build_identifying_query(f.num_vars, a.h);
  std::cout << "pair selection: increasing twin pairs with gap " << a.h
            << ", skipping any candidate sharing a prime with a selected pair\n";
  for (std::int32_t i = 0; i < query.num_vars(); ++i)
    std::cout << "x" << (i + 1) << " = " << query.x[static_cast<std::size_t>(i)] << "  (pair "
              << query.pairs[static_cast<std::size_t>(i)].a << ","
              << query.pairs[static_cast<std::size_t>(i)].b << ")\n";

  std::vector<qsat::RationalClauseLoss> losses = qsat::rational_clause_losses(f, query);
  for (const qsat::RationalClauseLoss& loss : losses) {
    mpq_class complement = 1 - loss.value;
    complement.canonicalize();
    std::cout << "clause " << loss.clause_index << ": V = " << loss.value
              << "  1-V = " << complement << '\n';
  }

  qsat::CnfFormula decoded = qsat::decode_formula(losses, query);
  bool match = decoded.num_vars == f.num_vars && decoded.clauses.size() == f.clauses.size();
  for (std::size_t c = 0; match && c < f.clauses.size(); ++c) {
    std::vector<qsat::Lit> lhs = f.clauses[c];
    std::vector<qsat::Lit> rhs = decoded.clauses[c];
    std::sort(lhs.begin(), lhs.end());
    std::sort(rhs.begin(), rhs.end());
    match = lhs == rhs;
  }
  std::cout << "decoded formula:\n" << qsat::write_dimacs(decoded);
  std::cout << (match ? "round trip: exact\n" : "round trip: MISMATCH\n");
  return match ? 0 : 1;
}

struct TheoremVerifyArgs {
  std::string dir;
};

int cmd_theorem_verify1(const TheoremVerifyArgs& a) {
  qsat::Dataset ds = qsat::load_dataset(a.dir);
  std::int64_t clauses_checked = 0;
  std::int64_t skipped = 0;
  std::vector<std::string> violations;
  for (std::size_t i = 0; i < ds.formulas.size(); ++i) {
    const qsat::CnfFormula& f = ds.formulas[i];
    if (f.num_vars > 20) {
      ++skipped;
      continue;
    }
    qsat::Theorem1Report report = qsat::verify_theorem1_exhaustive(f);
    clauses_checked += report.clauses_checked;
    for (std::string& v : report.violations)
      violations.push_back(ds.manifest.instances[i].file + ": " + std::move(v));
  }
  std::cout << "checked " << clauses_checked << " clause evaluations over "
            << (ds.formulas.size() - static_cast<std::size_t>(skipped)) << " formulas";
  if (skipped) std::cout << " (skipped " << skipped << " with more than 20 variables)";
  std::cout << '\n';
  for (const std::string& v : violations) std::cout << "violation: " << v << '\n';
  std::cout << (violations.empty() ? "all clause and formula values are exact Booleans\n"
                                   : "FAILED\n");
  return violations.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"query-driven recurrent SAT network laboratory"};
  app.require_subcommand(1);
  int rc = 0;

  GenerateArgs gen_args;
  CLI::App* gen = app.add_subcommand("generate", "sample a satisfiable-instance dataset");
  gen->add_option("--task", gen_args.task, "ksat | 3sat | 3clique | kcoloring")->required();
  gen->add_option("--min-size", gen_args.min_size, "smallest variable/vertex count");
  gen->add_option("--max-size", gen_args.max_size, "largest variable/vertex count");
  gen->add_option("--count", gen_args.count, "instances to produce");
  gen->add_option("--seed", gen_args.seed, "master seed");
  gen->add_option("--oracle-decisions", gen_args.oracle_decisions, "solver budget per candidate");
  gen->add_option("--out", gen_args.out, "output directory")->required();
  gen->callback([&] { rc = cmd_generate(gen_args); });

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "train a model on a generated dataset");
  train->add_option("--train-dir", train_args.train_dir)->required();
  train->add_option("--val-dir", train_args.val_dir)->required();
  train->add_option("--out", train_args.out, "output directory")->required();
  train->add_option("--arch", train_args.arch,
                    "querysat | neurocore | neurocore_query | neurocore_query_g");
  train->add_option("--d", train_args.d, "feature maps");
  train->add_option("--r", train_args.r, "noise columns");
  train->add_option("--u", train_args.u, "candidate assignments");
  train->add_option("--alpha", train_args.alpha, "gradient damping");
  train->add_option("--query-grad", train_args.query_grad, "clause_sum | log");
  train->add_flag("--noise-per-pass", train_args.noise_per_pass,
                  "draw noise once per forward instead of per step");
  train->add_option("--lr", train_args.lr, "learning rate");
  train->add_option("--steps-train", train_args.steps_train);
  train->add_option("--steps-eval", train_args.steps_eval);
  train->add_option("--iterations", train_args.iterations);
  train->add_option("--node-budget", train_args.node_budget, "variables + clauses per batch");
  train->add_option("--seed", train_args.seed, "master seed");
  train->add_option("--val-interval", train_args.val_interval);
  train->add_flag("--trail", train_args.trail, "save a checkpoint at every validation");
  train->add_option("--resume", train_args.resume, "checkpoint to continue from");
  train->callback([&] { rc = cmd_train(train_args); });

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
  eval->add_option("--checkpoint", eval_args.checkpoint)->required();
  eval->add_option("--dataset", eval_args.dataset)->required();
  eval->add_option("--steps", eval_args.steps, "recurrent steps");
  eval->add_option("--node-budget", eval_args.node_budget);
  eval->add_option("--seed", eval_args.seed);
  eval->add_option("--out", eval_args.out, "output directory")->required();
  eval->callback([&] { rc = cmd_eval(eval_args); });

  SolveArgs solve_args;
  CLI::App* solve = app.add_subcommand("solve", "run a classical solver on one formula");
  solve->add_option("--solver", solve_args.solver, "gsat | dpll")->required();
  solve->add_option("--max-flips", solve_args.max_flips, "flips per try (gsat)");
  solve->add_option("--tries", solve_args.tries, "restarts (gsat)");
  solve->add_option("--decisions", solve_args.decisions, "decision budget (dpll)");
  solve->add_option("--seed", solve_args.seed);
  solve->add_option("file", solve_args.file, "DIMACS file")->required();
  solve->callback([&] { rc = cmd_solve(solve_args); });

  BenchArgs bench_args;
  CLI::App* bench = app.add_subcommand("bench", "benchmark solvers, emit cactus data");
  bench->add_option("--dataset", bench_args.dataset)->required();
  bench->add_option("--solvers", bench_args.solvers, "comma list of querysat,gsat,dpll");
  bench->add_option("--checkpoint", bench_args.checkpoint, "model for querysat");
  bench->add_option("--querysat-steps", bench_args.limits.querysat_steps);
  bench->add_option("--gsat-flips", bench_args.limits.gsat_flips_per_try);
  bench->add_option("--gsat-tries", bench_args.limits.gsat_tries);
  bench->add_option("--dpll-decisions", bench_args.limits.dpll_decisions);
  bench->add_option("--node-budget", bench_args.limits.node_budget);
  bench->add_option("--seed", bench_args.limits.seed);
  bench->add_option("--budget-seconds", bench_args.limits.budget_seconds,
                    "modeled seconds per full budget");
  bench->add_option("--workers", bench_args.limits.workers);
  bench->add_option("--out", bench_args.out, "output directory")->required();
  bench->callback([&] { rc = cmd_bench(bench_args); });

  ProbeArgs probe_args;
  CLI::App* probe = app.add_subcommand("probe", "query introspection over a checkpoint trail");
  probe->add_option("--trail", probe_args.trail, "directory of .qsc checkpoints")->required();
  probe->add_option("--dataset", probe_args.dataset)->required();
  probe->add_option("--steps", probe_args.steps);
  probe->add_option("--node-budget", probe_args.node_budget);
  probe->add_option("--seed", probe_args.seed);
  probe->add_option("--out", probe_args.out, "output directory")->required();
  probe->callback([&] { rc = cmd_probe(probe_args); });

  CLI::App* theorem = app.add_subcommand("theorem", "exact rational loss tools");
  theorem->require_subcommand(1);
  TheoremDemoArgs demo_args;
  CLI::App* demo = theorem->add_subcommand("demo", "encode and decode one formula");
  demo->add_option("--formula", demo_args.formula, "DIMACS file")->required();
  demo->add_option("--gap", demo_args.h, "prime gap (even)");
  demo->callback([&] { rc = cmd_theorem_demo(demo_args); });
  TheoremVerifyArgs verify_args;
  CLI::App* verify1 = theorem->add_subcommand("verify1", "exhaustive Boolean-equivalence sweep");
  verify1->add_option("--dir", verify_args.dir, "dataset directory")->required();
  verify1->callback([&] { rc = cmd_theorem_verify1(verify_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const qsat::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const qsat::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const qsat::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 3;
  } catch (const qsat::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 4;
  } catch (const qsat::CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << '\n';
    return 5;
  } catch (const qsat::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return rc;
}
