#include "qsat/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace qsat {

namespace {

using Clock = std::chrono::steady_clock;

// Substream tags for deriving independent streams from the run seed.
constexpr std::uint64_t kStreamInit = 1;
constexpr std::uint64_t kStreamData = 2;
constexpr std::uint64_t kStreamNoise = 3;
constexpr std::uint64_t kStreamValNoise = 4;

std::int64_t node_count(const CnfFormula& f) {
  return static_cast<std::int64_t>(f.num_vars) + static_cast<std::int64_t>(f.clauses.size());
}

}  // namespace

void TrainConfig::validate() const {
  if (learning_rate <= 0) throw ConfigError("learning_rate must be > 0");
  if (s_train < 1) throw ConfigError("s_train must be >= 1");
  if (s_test < 1) throw ConfigError("s_test must be >= 1");
  if (iterations < 0) throw ConfigError("iterations must be >= 0");
  if (node_budget < 1) throw ConfigError("node_budget must be >= 1");
  if (validation_interval < 1) throw ConfigError("validation_interval must be >= 1");
  if (beta1 < 0 || beta1 >= 1 || beta2 < 0 || beta2 >= 1)
    throw ConfigError("optimizer betas must be in [0,1)");
  if (epsilon <= 0) throw ConfigError("optimizer epsilon must be > 0");
}

void adabelief_update(std::vector<Parameter>& params, AdaBeliefState& opt,
                      const TrainConfig& cfg) {
  if (opt.m.empty()) {
    for (const Parameter& p : params) {
      opt.m.emplace_back(p.tensor.rows(), p.tensor.cols());
      opt.s.emplace_back(p.tensor.rows(), p.tensor.cols());
    }
  }
  if (opt.m.size() != params.size())
    throw ShapeError("optimizer state does not match the parameter list");
  ++opt.t;
  double b1 = cfg.beta1, b2 = cfg.beta2, eps = cfg.epsilon;
  double c1 = 1.0 - std::pow(b1, static_cast<double>(opt.t));
  double c2 = 1.0 - std::pow(b2, static_cast<double>(opt.t));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = params[k];
    if (!p.trainable) continue;
    if (opt.m[k].rows != p.tensor.rows() || opt.m[k].cols != p.tensor.cols())
      throw ShapeError("optimizer moment shape mismatch for " + p.name);
    const std::vector<float>& grad = p.tensor.node()->grad;
    bool has_grad = !grad.empty();
    float* mv = opt.m[k].v.data();
    float* sv = opt.s[k].v.data();
    float* theta = p.tensor.data().data();
    std::size_t count = p.tensor.size();
    for (std::size_t i = 0; i < count; ++i) {
      double g = has_grad ? static_cast<double>(grad[i]) : 0.0;
      double m = b1 * mv[i] + (1.0 - b1) * g;
      double diff = g - m;
      double s = b2 * sv[i] + (1.0 - b2) * diff * diff + eps;
      mv[i] = static_cast<float>(m);
      sv[i] = static_cast<float>(s);
      double mhat = m / c1;
      double shat = s / c2;
      theta[i] = static_cast<float>(theta[i] - cfg.learning_rate * mhat / (std::sqrt(shat) + eps));
    }
  }
}

void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows) {
  // Locale-proof fixed formatting; rerunning a seeded session must
  // reproduce this file byte for byte apart from the wall_ms column.
  char buf[64];
  out << "iteration,loss,val_solved_fraction,wall_ms\n";
  for (const MetricsRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.9g", r.loss);
    out << r.iteration << ',' << buf << ',';
    if (r.has_validation) {
      std::snprintf(buf, sizeof(buf), "%.9g", r.val_solved_fraction);
      out << buf;
    }
    std::snprintf(buf, sizeof(buf), "%.3f", r.wall_ms);
    out << ',' << buf << '\n';
  }
}

std::uint64_t data_stream_seed(std::uint64_t seed) { return fold_seed(seed, kStreamData); }

TrainState init_training(const ModelConfig& mc, const TrainConfig& tc) {
  tc.validate();
  Rng init_rng(fold_seed(tc.seed, kStreamInit));
  return TrainState{Model(mc, init_rng), AdaBeliefState{}, 0, Rng(data_stream_seed(tc.seed))};
}

std::vector<MetricsRow> train(TrainState& state, std::span<const CnfFormula> train_set,
                              std::span<const CnfFormula> val_set, const TrainConfig& tc,
                              const std::function<void(const MetricsRow&)>& on_row) {
  tc.validate();
  if (train_set.empty()) throw DataError("empty training set");
  for (std::size_t i = 0; i < train_set.size(); ++i) {
    if (node_count(train_set[i]) > tc.node_budget)
      throw DataError("training instance " + std::to_string(i) + " exceeds the node budget");
  }

  std::vector<Parameter>& params = state.model.parameters();
  std::vector<MetricsRow> log;
  std::vector<std::int64_t> perm(train_set.size());

  for (std::int64_t iter = state.iteration + 1; iter <= tc.iterations; ++iter) {
    auto t0 = Clock::now();
    // one batch per iteration: shuffled order, filled until the budget
    Rng it_rng(state.data_rng.next_u64());
    std::iota(perm.begin(), perm.end(), 0);
    it_rng.shuffle(perm);
    std::vector<CnfFormula> member_formulas;
    std::vector<std::int64_t> member_ids;
    std::int64_t nodes = 0;
    for (std::int64_t idx : perm) {
      std::int64_t sz = node_count(train_set[idx]);
      if (!member_ids.empty() && nodes + sz > tc.node_budget) break;
      member_formulas.push_back(train_set[idx]);
      member_ids.push_back(idx);
      nodes += sz;
    }
    Batch batch = make_batch(member_formulas, member_ids);

    for (Parameter& p : params) p.tensor.zero_grad();
    ForwardResult fwd =
        state.model.forward(batch, member_formulas, tc.s_train, RunMode::kTrain,
                            fold_seed(fold_seed(tc.seed, kStreamNoise),
                                      static_cast<std::uint64_t>(iter)));
    backward(fwd.total_loss);
    adabelief_update(params, state.opt, tc);
    state.iteration = iter;

    MetricsRow row;
    row.iteration = iter;
    row.loss = static_cast<double>(fwd.total_loss.item()) / batch.count();
    if (iter % tc.validation_interval == 0 || iter == tc.iterations) {
      if (!val_set.empty()) {
        EvalResult ev = evaluate(state.model, val_set, {}, tc.s_test, tc.node_budget,
                                 fold_seed(fold_seed(tc.seed, kStreamValNoise),
                                           static_cast<std::uint64_t>(iter)));
        row.val_solved_fraction = ev.solved_fraction;
        row.has_validation = true;
      }
    }
    row.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    log.push_back(row);
    if (on_row) on_row(row);
  }
  return log;
}

EvalResult evaluate(const Model& model, std::span<const CnfFormula> formulas,
                    std::span<const std::int64_t> ids, int steps, std::int64_t node_budget,
                    std::uint64_t noise_seed, const StepObserver& observer) {
  auto t0 = Clock::now();
  EvalResult res;
  std::size_t total = formulas.size();
  res.solved.assign(total, 0);
  res.exit_step.assign(total, -1);
  res.assignments.resize(total);
  if (total == 0) return res;

  // sequential packing: consecutive instances share a batch up to the budget
  std::size_t begin = 0;
  while (begin < total) {
    std::size_t end = begin;
    std::int64_t nodes = 0;
    while (end < total) {
      std::int64_t sz = node_count(formulas[end]);
      if (end > begin && nodes + sz > node_budget) break;
      if (end == begin && sz > node_budget)
        throw DataError("instance " + std::to_string(begin) + " exceeds the node budget");
      nodes += sz;
      ++end;
    }
    std::vector<std::int64_t> member_ids;
    for (std::size_t i = begin; i < end; ++i)
      member_ids.push_back(ids.empty() ? static_cast<std::int64_t>(i) : ids[i]);
    Batch batch = make_batch(formulas.subspan(begin, end - begin), member_ids);
    ForwardResult fwd = model.forward(batch, formulas.subspan(begin, end - begin),
                                      steps, RunMode::kEval, noise_seed, observer);
    for (std::size_t i = begin; i < end; ++i) {
      res.solved[i] = fwd.solved[i - begin];
      res.exit_step[i] = fwd.exit_step[i - begin];
      res.assignments[i] = std::move(fwd.assignments[i - begin]);
    }
    begin = end;
  }
  std::size_t solved_count = 0;
  for (std::uint8_t s : res.solved) solved_count += s;
  res.solved_fraction = static_cast<double>(solved_count) / static_cast<double>(total);
  res.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return res;
}

}  // namespace qsat
