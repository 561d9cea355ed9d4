#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qsat/cnf.hpp"

namespace qsat {

struct DatasetEntry {
  std::string file;  // relative to the dataset directory, e.g. "000017.cnf"
  std::int32_t n = 0;
  std::int64_t m = 0;
  std::string task;
  std::uint64_t seed = 0;  // the instance's own generator stream seed
};

struct DatasetManifest {
  std::string task;
  std::uint64_t seed = 0;  // dataset-level seed
  int min_size = 0;
  int max_size = 0;
  std::int64_t rejected_unsat = 0;
  std::int64_t rejected_undecided = 0;
  std::int64_t rejected_disconnected = 0;
  std::vector<DatasetEntry> instances;
};

struct Dataset {
  DatasetManifest manifest;
  std::vector<CnfFormula> formulas;  // aligned with manifest.instances
};

// Writes one zero-padded .cnf per formula plus manifest.json. Entries'
// file/n/m fields are filled in from the formulas; the completed manifest
// is returned.
DatasetManifest save_dataset(const std::string& dir, DatasetManifest manifest,
                             const std::vector<CnfFormula>& formulas);

Dataset load_dataset(const std::string& dir);

}  // namespace qsat
