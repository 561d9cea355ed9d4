#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qsat/model.hpp"
#include "qsat/train.hpp"

namespace qsat {

// On-disk model snapshot: model config, parameter and optimizer-moment
// arrays by name, the iteration counter, and the data-order stream state.
// File layout: a magic line, a JSON header (names, shapes, byte offsets),
// then the raw little-endian float32 arrays.
struct Checkpoint {
  ModelConfig config;
  std::vector<std::pair<std::string, MatF>> tensors;
  std::int64_t iteration = 0;
  std::int64_t opt_t = 0;  // optimizer step count; moments live in `tensors`
  Rng::State data_rng{};
  bool has_rng = false;
};

Checkpoint make_checkpoint(const TrainState& state);
Checkpoint make_checkpoint(const Model& model);  // parameters only

void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

// Rebuilds the model (and optionally the full training session) from a
// snapshot. Shape mismatches against the stored config are errors.
Model model_from_checkpoint(const Checkpoint& ck);
TrainState training_from_checkpoint(const Checkpoint& ck, const TrainConfig& tc);

}  // namespace qsat
