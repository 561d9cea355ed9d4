#include "qsat/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "json.hpp"

namespace qsat {

namespace {

constexpr const char* kMagic = "qsatckpt v1";
constexpr int kVersion = 1;

using json = nlohmann::json;

std::string u64_hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t hex_u64(const std::string& s) {
  if (s.size() != 16) throw CheckpointError("bad stream-state word '" + s + "'");
  return std::stoull(s, nullptr, 16);
}

// Arrays are little-endian on disk; byte-swap on big-endian hosts.
void to_disk_order(std::vector<float>& v) {
  if constexpr (std::endian::native == std::endian::big) {
    for (float& f : v) {
      std::uint32_t bits;
      std::memcpy(&bits, &f, 4);
      bits = __builtin_bswap32(bits);
      std::memcpy(&f, &bits, 4);
    }
  }
}

json config_to_json(const ModelConfig& c) {
  return json{{"d", c.d},
              {"r", c.r},
              {"u", c.u},
              {"alpha", c.alpha},
              {"query_grad_mode", c.query_grad_mode == GradMode::kLog ? "log" : "clause_sum"},
              {"architecture", architecture_name(c.architecture)},
              {"noise_per_pass", c.noise_per_pass}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.d = j.at("d").get<int>();
  c.r = j.at("r").get<int>();
  c.u = j.at("u").get<int>();
  c.alpha = j.at("alpha").get<float>();
  std::string mode = j.at("query_grad_mode").get<std::string>();
  if (mode == "log") c.query_grad_mode = GradMode::kLog;
  else if (mode == "clause_sum") c.query_grad_mode = GradMode::kClauseSum;
  else throw CheckpointError("unknown query_grad_mode '" + mode + "'");
  c.architecture = parse_architecture(j.at("architecture").get<std::string>());
  c.noise_per_pass = j.at("noise_per_pass").get<bool>();
  return c;
}

}  // namespace

Checkpoint make_checkpoint(const Model& model) {
  Checkpoint ck;
  ck.config = model.config();
  for (const Parameter& p : model.parameters()) ck.tensors.emplace_back(p.name, p.tensor.to_mat());
  return ck;
}

Checkpoint make_checkpoint(const TrainState& state) {
  Checkpoint ck = make_checkpoint(state.model);
  const std::vector<Parameter>& params = state.model.parameters();
  if (state.opt.t > 0) {
    for (std::size_t k = 0; k < params.size(); ++k) {
      ck.tensors.emplace_back("opt.m." + params[k].name, state.opt.m[k]);
      ck.tensors.emplace_back("opt.s." + params[k].name, state.opt.s[k]);
    }
  }
  ck.iteration = state.iteration;
  ck.opt_t = state.opt.t;
  ck.data_rng = state.data_rng.state();
  ck.has_rng = true;
  return ck;
}

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  json header;
  header["version"] = kVersion;
  header["config"] = config_to_json(ck.config);
  header["iteration"] = ck.iteration;
  header["opt_t"] = ck.opt_t;
  if (ck.has_rng) {
    header["rng"] = json{{"s",
                          {u64_hex(ck.data_rng.s[0]), u64_hex(ck.data_rng.s[1]),
                           u64_hex(ck.data_rng.s[2]), u64_hex(ck.data_rng.s[3])}},
                         {"spare", ck.data_rng.spare},
                         {"has_spare", ck.data_rng.has_spare}};
  }
  json table = json::array();
  std::int64_t offset = 0;
  for (const auto& [name, mat] : ck.tensors) {
    std::int64_t bytes = static_cast<std::int64_t>(mat.v.size()) * 4;
    table.push_back(json{{"name", name},
                         {"rows", mat.rows},
                         {"cols", mat.cols},
                         {"dtype", "f32le"},
                         {"offset", offset},
                         {"bytes", bytes}});
    offset += bytes;
  }
  header["tensors"] = std::move(table);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint '" + path + "'");
  std::string head = header.dump();
  out << kMagic << '\n' << head.size() << '\n' << head << '\n';
  for (const auto& [name, mat] : ck.tensors) {
    std::vector<float> buf = mat.v;
    to_disk_order(buf);
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * 4));
  }
  out.flush();
  if (!out) throw IoError("short write on checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint '" + path + "'");
  std::string magic;
  if (!std::getline(in, magic)) throw CheckpointError("empty checkpoint file");
  if (magic != kMagic)
    throw CheckpointError("not a checkpoint (or unsupported version): '" + magic + "'");
  std::string size_line;
  if (!std::getline(in, size_line)) throw CheckpointError("truncated checkpoint header");
  std::size_t head_size = 0;
  try {
    head_size = std::stoull(size_line);
  } catch (const std::exception&) {
    throw CheckpointError("bad header length '" + size_line + "'");
  }
  std::string head(head_size, '\0');
  in.read(head.data(), static_cast<std::streamsize>(head_size));
  if (static_cast<std::size_t>(in.gcount()) != head_size)
    throw CheckpointError("truncated checkpoint header");
  if (in.get() != '\n') throw CheckpointError("malformed checkpoint header terminator");

  json header;
  try {
    header = json::parse(head);
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("corrupted checkpoint header: ") + e.what());
  }
  if (header.at("version").get<int>() != kVersion)
    throw CheckpointError("unsupported checkpoint version " +
                          std::to_string(header.at("version").get<int>()));

  Checkpoint ck;
  try {
    ck.config = config_from_json(header.at("config"));
    ck.iteration = header.at("iteration").get<std::int64_t>();
    ck.opt_t = header.at("opt_t").get<std::int64_t>();
    if (header.contains("rng")) {
      const json& r = header.at("rng");
      for (int i = 0; i < 4; ++i) ck.data_rng.s[i] = hex_u64(r.at("s").at(i).get<std::string>());
      ck.data_rng.spare = r.at("spare").get<double>();
      ck.data_rng.has_spare = r.at("has_spare").get<bool>();
      ck.has_rng = true;
    }
    std::int64_t expect_offset = 0;
    for (const json& t : header.at("tensors")) {
      std::string name = t.at("name").get<std::string>();
      int rows = t.at("rows").get<int>();
      int cols = t.at("cols").get<int>();
      if (t.at("dtype").get<std::string>() != "f32le")
        throw CheckpointError("unsupported dtype for " + name);
      std::int64_t offset = t.at("offset").get<std::int64_t>();
      std::int64_t bytes = t.at("bytes").get<std::int64_t>();
      if (rows < 0 || cols < 0 || offset != expect_offset ||
          bytes != static_cast<std::int64_t>(rows) * cols * 4)
        throw CheckpointError("inconsistent shape table entry for " + name);
      expect_offset += bytes;
      MatF mat(rows, cols);
      in.read(reinterpret_cast<char*>(mat.v.data()), bytes);
      if (in.gcount() != bytes) throw CheckpointError("truncated tensor data for " + name);
      to_disk_order(mat.v);
      ck.tensors.emplace_back(std::move(name), std::move(mat));
    }
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("corrupted checkpoint header: ") + e.what());
  }
  return ck;
}

Model model_from_checkpoint(const Checkpoint& ck) {
  Rng throwaway(0);
  Model model(ck.config, throwaway);
  for (Parameter& p : model.parameters()) {
    const MatF* found = nullptr;
    for (const auto& [name, mat] : ck.tensors) {
      if (name == p.name) {
        found = &mat;
        break;
      }
    }
    if (!found) throw CheckpointError("checkpoint is missing parameter " + p.name);
    if (found->rows != p.tensor.rows() || found->cols != p.tensor.cols())
      throw CheckpointError("shape table inconsistent with model config for " + p.name);
    p.tensor.data() = found->v;
  }
  return model;
}

TrainState training_from_checkpoint(const Checkpoint& ck, const TrainConfig& tc) {
  TrainState st{model_from_checkpoint(ck), AdaBeliefState{}, ck.iteration,
                Rng(data_stream_seed(tc.seed))};
  if (ck.has_rng) st.data_rng.set_state(ck.data_rng);
  if (ck.opt_t > 0) {
    st.opt.t = ck.opt_t;
    for (const Parameter& p : st.model.parameters()) {
      const MatF* m = nullptr;
      const MatF* s = nullptr;
      for (const auto& [name, mat] : ck.tensors) {
        if (name == "opt.m." + p.name) m = &mat;
        if (name == "opt.s." + p.name) s = &mat;
      }
      if (!m || !s) throw CheckpointError("checkpoint is missing optimizer moments for " + p.name);
      if (m->rows != p.tensor.rows() || m->cols != p.tensor.cols() || s->rows != m->rows ||
          s->cols != m->cols)
        throw CheckpointError("optimizer moment shape mismatch for " + p.name);
      st.opt.m.push_back(*m);
      st.opt.s.push_back(*s);
    }
  }
  return st;
}

}  // namespace qsat
