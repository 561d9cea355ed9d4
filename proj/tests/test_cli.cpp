#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

// End-to-end smoke tests for the installed binary; they run only when the
// build exports QSAT_CLI and otherwise pass vacuously.
std::string cli_path() {
  const char* p = std::getenv("QSAT_CLI");
  return p ? std::string(p) : std::string();
}

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run(const std::string& args) {
  RunResult r;
  std::string cmd = cli_path() + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf;
  while (std::size_t got = std::fread(buf.data(), 1, buf.size(), pipe))
    r.output.append(buf.data(), got);
  int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch_root() {
  fs::path dir = fs::temp_directory_path() / "qsat_cli_tests";
  fs::create_directories(dir);
  return dir;
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("cli generate, bench, and theorem verify1 round trip") {
  if (cli_path().empty()) return;
  fs::path root = scratch_root() / "flow";
  fs::remove_all(root);
  fs::path ds = root / "ds";

  RunResult gen = run("generate --task 3sat --min-size 5 --max-size 8 --count 4 --seed 3 --out " +
                      ds.string());
  CHECK(gen.exit_code == 0);
  CHECK(fs::exists(ds / "manifest.json"));
  CHECK(fs::exists(ds / "000000.cnf"));
  CHECK(fs::exists(ds / "stamp.json"));

  fs::path bench = root / "bench";
  RunResult br = run("bench --dataset " + ds.string() +
                     " --solvers dpll,gsat --gsat-flips 200 --gsat-tries 2 --out " +
                     bench.string());
  CHECK(br.exit_code == 0);
  CHECK(fs::exists(bench / "records.csv"));
  CHECK(fs::exists(bench / "cactus.csv"));

  std::ifstream records(bench / "records.csv");
  std::string header;
  std::getline(records, header);
  CHECK(header == "instance,solver,status,seconds,units,exit_step");

  RunResult thm = run("theorem verify1 --dir " + ds.string());
  CHECK(thm.exit_code == 0);
  CHECK(contains(thm.output, "all clause and formula values are exact Booleans"));
}

TEST_CASE("cli solve prints a checkable witness") {
  if (cli_path().empty()) return;
  fs::path root = scratch_root() / "solve";
  fs::create_directories(root);
  fs::path cnf = root / "tiny.cnf";
  {
    std::ofstream out(cnf);
    out << "p cnf 3 3\n1 2 0\n-1 3 0\n-2 -3 0\n";
  }

  RunResult dpll = run("solve --solver dpll " + cnf.string());
  CHECK(dpll.exit_code == 0);
  CHECK(contains(dpll.output, "s SATISFIABLE"));
  CHECK(contains(dpll.output, "v "));

  RunResult gsat = run("solve --solver gsat --seed 2 " + cnf.string());
  CHECK(gsat.exit_code == 0);
  CHECK(contains(gsat.output, "s SATISFIABLE"));

  CHECK(run("solve --solver cdcl " + cnf.string()).exit_code == 2);
  CHECK(run("solve --solver dpll " + (root / "missing.cnf").string()).exit_code == 3);
}

TEST_CASE("cli theorem demo reproduces the rational worked example") {
  if (cli_path().empty()) return;
  fs::path root = scratch_root() / "demo";
  fs::create_directories(root);
  fs::path cnf = root / "pair.cnf";
  {
    std::ofstream out(cnf);
    out << "p cnf 2 1\n1 -2 0\n";
  }

  RunResult demo = run("theorem demo --formula " + cnf.string());
  CHECK(demo.exit_code == 0);
  CHECK(contains(demo.output, "59/65"));
  CHECK(contains(demo.output, "6/65"));
  CHECK(contains(demo.output, "round trip: exact"));
}

TEST_CASE("cli train, eval, and probe chain on a tiny run") {
  if (cli_path().empty()) return;
  fs::path root = scratch_root() / "train";
  fs::remove_all(root);
  fs::path ds = root / "ds";
  REQUIRE(run("generate --task 3sat --min-size 5 --max-size 7 --count 6 --seed 11 --out " +
              ds.string())
              .exit_code == 0);

  fs::path out = root / "run";
  RunResult tr = run("train --train-dir " + ds.string() + " --val-dir " + ds.string() +
                     " --out " + out.string() +
                     " --d 4 --r 2 --u 2 --steps-train 2 --steps-eval 3 --iterations 4"
                     " --node-budget 200 --val-interval 2 --trail --seed 5");
  CHECK(tr.exit_code == 0);
  CHECK(fs::exists(out / "metrics.csv"));
  CHECK(fs::exists(out / "checkpoint.qsc"));
  CHECK(fs::exists(out / "trail" / "ckpt_00000002.qsc"));
  CHECK(fs::exists(out / "trail" / "ckpt_00000004.qsc"));

  fs::path eval_dir = root / "eval";
  RunResult ev = run("eval --checkpoint " + (out / "checkpoint.qsc").string() + " --dataset " +
                     ds.string() + " --steps 4 --node-budget 200 --out " + eval_dir.string());
  CHECK(ev.exit_code == 0);
  CHECK(contains(ev.output, "solved fraction"));
  std::ifstream eval_csv(eval_dir / "eval.csv");
  std::string header;
  std::getline(eval_csv, header);
  CHECK(header == "instance,file,n,m,solved,exit_step");

  fs::path probe_dir = root / "probe";
  RunResult pr = run("probe --trail " + (out / "trail").string() + " --dataset " + ds.string() +
                     " --steps 3 --node-budget 200 --out " + probe_dir.string());
  CHECK(pr.exit_code == 0);
  std::ifstream probe_csv(probe_dir / "probe.csv");
  std::getline(probe_csv, header);
  CHECK(header ==
        "iteration,query_logit_match,query_sat_clause_fraction,consecutive_query_match,"
        "query_logit_match_colmean,query_sat_clause_fraction_colmean,"
        "consecutive_query_match_colmean,solved_fraction");
  std::string row;
  int data_rows = 0;
  while (std::getline(probe_csv, row))
    if (!row.empty()) ++data_rows;
  CHECK(data_rows == 2);

  CHECK(run("eval --checkpoint " + (out / "metrics.csv").string() + " --dataset " + ds.string() +
            " --out " + eval_dir.string())
            .exit_code == 5);
}
