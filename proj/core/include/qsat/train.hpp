#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "qsat/model.hpp"

namespace qsat {

struct TrainConfig {
  double learning_rate = 2e-4;
  int s_train = 32;  // recurrent steps per training forward
  int s_test = 64;   // recurrent steps for validation
  std::int64_t iterations = 1000;
  std::int64_t node_budget = 20'000;  // variables + clauses per batch
  std::uint64_t seed = 1;
  std::int64_t validation_interval = 100;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-16;

  void validate() const;
};

// AdaBelief moments, aligned with the model's parameter order.
struct AdaBeliefState {
  std::int64_t t = 0;
  std::vector<MatF> m;  // first moment
  std::vector<MatF> s;  // centered second moment
};

// One optimizer step over all trainable parameters; reads each parameter's
// accumulated gradient (absent gradient = zero). Lazily sizes the moments.
void adabelief_update(std::vector<Parameter>& params, AdaBeliefState& opt,
                      const TrainConfig& cfg);

struct MetricsRow {
  std::int64_t iteration = 0;
  double loss = 0.0;  // per-instance mean of the summed step losses
  double val_solved_fraction = 0.0;
  bool has_validation = false;
  double wall_ms = 0.0;
};

// CSV: iteration,loss,val_solved_fraction,wall_ms with an empty validation
// cell on rows without one.
void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows);

// A resumable training session: the model, optimizer moments, iteration
// counter, and the data-order stream.
struct TrainState {
  Model model;
  AdaBeliefState opt;
  std::int64_t iteration = 0;
  Rng data_rng;
};

TrainState init_training(const ModelConfig& mc, const TrainConfig& tc);

// Seed of the data-order stream derived from a run seed (checkpoint resume
// without a stored stream state falls back to this).
std::uint64_t data_stream_seed(std::uint64_t seed);

// Runs iterations state.iteration+1 .. tc.iterations. Per iteration: shuffle
// the training indices with the data stream, fill one batch up to
// node_budget, forward s_train steps, backpropagate the summed step losses,
// AdaBelief-update. Validates on val_set every validation_interval
// iterations (and on the last). Deterministic given seed and data order.
std::vector<MetricsRow> train(TrainState& state, std::span<const CnfFormula> train_set,
                              std::span<const CnfFormula> val_set, const TrainConfig& tc,
                              const std::function<void(const MetricsRow&)>& on_row = nullptr);

struct EvalResult {
  double solved_fraction = 0.0;
  std::vector<std::uint8_t> solved;
  std::vector<std::int32_t> exit_step;  // 1-based; -1 when unsolved
  std::vector<std::vector<std::uint8_t>> assignments;
  double wall_seconds = 0.0;
};

// Eval-mode forward over the set, packed sequentially into node_budget
// batches. ids key the per-instance noise streams; empty means 0..N-1.
EvalResult evaluate(const Model& model, std::span<const CnfFormula> formulas,
                    std::span<const std::int64_t> ids, int steps, std::int64_t node_budget,
                    std::uint64_t noise_seed, const StepObserver& observer = nullptr);

}  // namespace qsat
