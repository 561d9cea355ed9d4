#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qsat/graph.hpp"
#include "qsat/loss.hpp"
#include "qsat/nn.hpp"
#include "qsat/rng.hpp"
#include "qsat/tensor.hpp"

namespace qsat {

enum class Architecture { kQuerySat, kNeuroCore, kNeuroCoreQuery, kNeuroCoreQueryG };

const char* architecture_name(Architecture a);
Architecture parse_architecture(const std::string& name);

struct ModelConfig {
  int d = 128;          // feature maps
  int r = 4;            // noise dimensions
  int u = 8;            // parallel assignments
  float alpha = 0.2f;   // grad_scale on recurrent states
  GradMode query_grad_mode = GradMode::kClauseSum;
  Architecture architecture = Architecture::kQuerySat;
  bool noise_per_pass = false;  // sample noise once per forward instead of per step

  void validate() const;
};

// Recurrent state across steps. var_state holds n rows for QuerySAT and 2n
// literal rows (positives then negatives) for the NeuroCore family; both
// start all-ones. solved_mask is per instance and never unsolves.
struct ModelState {
  Tensor var_state;
  Tensor clause_state;
  int step = 0;
  std::vector<std::uint8_t> solved_mask;
};

struct StepOutput {
  Tensor assignments;            // n x u, sigmoid outputs
  Tensor step_loss;              // 1x1, rank-weighted loss over unmasked instances
  Tensor column_losses;          // count x u, per-instance log losses
  std::vector<int> best_column;  // per instance, argmin column loss (ties: lowest)
  Tensor query;                  // n x d (undefined for plain NeuroCore)
  Tensor query_eval;             // m x d clause losses of the query (undefined likewise)
};

enum class RunMode { kTrain, kEval };

struct ForwardResult {
  // Per instance: rounded assignment of the exit-time (solved) or last-step
  // best column; solved entries are check_assignment verified.
  std::vector<std::vector<std::uint8_t>> assignments;
  std::vector<std::int32_t> exit_step;  // 1-based; -1 when never solved
  std::vector<std::uint8_t> solved;
  std::vector<float> step_losses;  // train mode: masked batch loss per step
  Tensor total_loss;               // train mode: graph-connected sum over steps
  int steps_run = 0;
};

// Called after every step; probing hooks read per-step internals here.
using StepObserver =
    std::function<void(int step, const StepOutput&, const ModelState&, const Batch&)>;

class Model {
 public:
  Model(const ModelConfig& cfg, Rng& init_rng);

  const ModelConfig& config() const { return cfg_; }
  std::vector<Parameter>& parameters() { return params_; }
  const std::vector<Parameter>& parameters() const { return params_; }

  ModelState initial_state(const Batch& batch) const;

  // One recurrent update. noise is the fresh n x r draw for this step (may
  // be empty when r = 0); the loss mask is taken from state.solved_mask.
  StepOutput step(ModelState& state, const Batch& batch, const MatF& noise) const;

  // Runs up to `steps` updates with the conditional exit: after each step the
  // rounded best column of every instance is checked through
  // check_assignment; solved instances freeze their reported assignment, and
  // in train mode drop out of later steps' loss. Noise streams are derived
  // per instance from noise_seed, so batching does not change them.
  ForwardResult forward(const Batch& batch, std::span<const CnfFormula> formulas, int steps,
                        RunMode mode, std::uint64_t noise_seed,
                        const StepObserver& observer = nullptr) const;

 private:
  StepOutput querysat_step(ModelState& state, const Batch& batch, const MatF& noise) const;
  StepOutput neurocore_step(ModelState& state, const Batch& batch, const MatF& noise) const;

  ModelConfig cfg_;
  Mlp mlp_q_;  // query head (absent for plain NeuroCore)
  Mlp mlp_c_;  // clause update
  Mlp mlp_v_;  // QuerySAT variable update / NeuroCore literal update
  Mlp mlp_o_;  // output head
  std::vector<Parameter> params_;
};

// Noise rows for one step: instance k's rows are drawn from a stream keyed
// by (seed, instance id, step), independent of how instances are batched.
MatF step_noise(const Batch& batch, int r, std::uint64_t seed, int step);

}  // namespace qsat
