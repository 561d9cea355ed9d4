#include "qsat/dataset.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "qsat/error.hpp"

namespace qsat {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string instance_filename(std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%06zu.cnf", index);
  return buf;
}

std::string u64_hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t hex_u64(const std::string& s) {
  try {
    return std::stoull(s, nullptr, 16);
  } catch (const std::exception&) {
    throw DataError("bad seed field '" + s + "' in manifest");
  }
}

}  // namespace

DatasetManifest save_dataset(const std::string& dir, DatasetManifest manifest,
                             const std::vector<CnfFormula>& formulas) {
  if (manifest.instances.size() != formulas.size())
    throw DataError("manifest entry count does not match formula count");
  fs::create_directories(dir);
  for (std::size_t i = 0; i < formulas.size(); ++i) {
    DatasetEntry& e = manifest.instances[i];
    e.file = instance_filename(i);
    e.n = formulas[i].num_vars;
    e.m = static_cast<std::int64_t>(formulas[i].clauses.size());
    write_dimacs_file(formulas[i], (fs::path(dir) / e.file).string());
  }

  json j;
  j["task"] = manifest.task;
  j["seed"] = u64_hex(manifest.seed);
  j["min_size"] = manifest.min_size;
  j["max_size"] = manifest.max_size;
  j["rejected_unsat"] = manifest.rejected_unsat;
  j["rejected_undecided"] = manifest.rejected_undecided;
  j["rejected_disconnected"] = manifest.rejected_disconnected;
  json list = json::array();
  for (const DatasetEntry& e : manifest.instances) {
    list.push_back(json{{"file", e.file},
                        {"n", e.n},
                        {"m", e.m},
                        {"task", e.task},
                        {"seed", u64_hex(e.seed)}});
  }
  j["instances"] = std::move(list);

  std::ofstream out(fs::path(dir) / "manifest.json", std::ios::trunc);
  if (!out) throw IoError("cannot write manifest in '" + dir + "'");
  out << j.dump(2) << '\n';
  out.flush();
  if (!out) throw IoError("short write on manifest in '" + dir + "'");
  return manifest;
}

Dataset load_dataset(const std::string& dir) {
  fs::path mpath = fs::path(dir) / "manifest.json";
  std::ifstream in(mpath);
  if (!in) throw IoError("cannot read '" + mpath.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("corrupted manifest in '" + dir + "': " + e.what());
  }

  Dataset ds;
  try {
    ds.manifest.task = j.at("task").get<std::string>();
    ds.manifest.seed = hex_u64(j.at("seed").get<std::string>());
    ds.manifest.min_size = j.at("min_size").get<int>();
    ds.manifest.max_size = j.at("max_size").get<int>();
    ds.manifest.rejected_unsat = j.at("rejected_unsat").get<std::int64_t>();
    ds.manifest.rejected_undecided = j.at("rejected_undecided").get<std::int64_t>();
    ds.manifest.rejected_disconnected = j.at("rejected_disconnected").get<std::int64_t>();
    for (const json& e : j.at("instances")) {
      DatasetEntry entry;
      entry.file = e.at("file").get<std::string>();
      entry.n = e.at("n").get<std::int32_t>();
      entry.m = e.at("m").get<std::int64_t>();
      entry.task = e.at("task").get<std::string>();
      entry.seed = hex_u64(e.at("seed").get<std::string>());
      ds.manifest.instances.push_back(std::move(entry));
    }
  } catch (const json::exception& e) {
    throw DataError("corrupted manifest in '" + dir + "': " + e.what());
  }

  for (const DatasetEntry& e : ds.manifest.instances) {
    CnfFormula f = parse_dimacs_file((fs::path(dir) / e.file).string());
    if (f.num_vars != e.n || static_cast<std::int64_t>(f.clauses.size()) != e.m)
      throw DataError("manifest disagrees with '" + e.file + "' (n or m mismatch)");
    ds.formulas.push_back(std::move(f));
  }
  return ds;
}

}  // namespace qsat
