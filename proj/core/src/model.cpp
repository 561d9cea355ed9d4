#include "qsat/model.hpp"

#include <cmath>

#include "qsat/ops.hpp"

namespace qsat {

const char* architecture_name(Architecture a) {
  switch (a) {
    case Architecture::kQuerySat: return "querysat";
    case Architecture::kNeuroCore: return "neurocore";
    case Architecture::kNeuroCoreQuery: return "neurocore_query";
    case Architecture::kNeuroCoreQueryG: return "neurocore_query_g";
  }
  throw ConfigError("unreachable architecture value");
}

Architecture parse_architecture(const std::string& name) {
  if (name == "querysat") return Architecture::kQuerySat;
  if (name == "neurocore") return Architecture::kNeuroCore;
  if (name == "neurocore_query") return Architecture::kNeuroCoreQuery;
  if (name == "neurocore_query_g") return Architecture::kNeuroCoreQueryG;
  throw ConfigError("unknown architecture '" + name + "'");
}

void ModelConfig::validate() const {
  if (d < 1) throw ConfigError("feature maps d must be >= 1");
  if (r < 0) throw ConfigError("noise dims r must be >= 0");
  if (u < 1) throw ConfigError("assignment count u must be >= 1");
  if (alpha < 0.0f || alpha > 1.0f) throw ConfigError("grad_scale alpha must be in [0,1]");
}

namespace {

bool has_query(Architecture a) { return a != Architecture::kNeuroCore; }

// Stop-gradient feature: d/dq of the chosen loss form, evaluated at the
// current query.
Tensor query_gradient_feature(const FactorGraph& g, const Tensor& q, GradMode mode,
                              const Tensor& e) {
  MatF qm = q.to_mat();
  MatF em = e.to_mat();
  MatF grad = loss_gradient(g, qm, mode, &em);
  return Tensor::from_mat(grad);
}

// Per-instance argmin over column losses, ties to the lowest column index.
std::vector<int> best_columns(const Tensor& column_losses) {
  int count = column_losses.rows();
  int u = column_losses.cols();
  std::vector<int> best(count, 0);
  for (int b = 0; b < count; ++b) {
    float lo = column_losses.at(b, 0);
    for (int j = 1; j < u; ++j) {
      if (column_losses.at(b, j) < lo) {
        lo = column_losses.at(b, j);
        best[b] = j;
      }
    }
  }
  return best;
}

// Loss tail shared by both architectures: per-clause values of the output
// assignments, per-instance log losses, rank-weighted masked batch loss.
void attach_loss(const Batch& batch, const std::vector<std::uint8_t>& mask, StepOutput& out) {
  Tensor values = ops::clause_values(batch.graph, out.assignments);
  out.column_losses = ops::segment_log_loss(values, batch.clause_offsets);
  out.step_loss = ops::multi_assignment_loss(out.column_losses, mask);
  out.best_column = best_columns(out.column_losses);
}

}  // namespace

MatF step_noise(const Batch& batch, int r, std::uint64_t seed, int step) {
  MatF noise(batch.graph.n, r);
  if (r == 0) return noise;
  for (std::int32_t k = 0; k < batch.count(); ++k) {
    Rng stream(fold_seed(fold_seed(seed, static_cast<std::uint64_t>(batch.instance_ids[k])),
                         static_cast<std::uint64_t>(step)));
    for (std::int32_t i = batch.var_offsets[k]; i < batch.var_offsets[k + 1]; ++i) {
      for (int c = 0; c < r; ++c) noise.at(i, c) = static_cast<float>(stream.normal());
    }
  }
  return noise;
}

Model::Model(const ModelConfig& cfg, Rng& init_rng) : cfg_(cfg) {
  cfg_.validate();
  int d = cfg_.d;
  int r = cfg_.r;
  int u = cfg_.u;
  bool qs = cfg_.architecture == Architecture::kQuerySat;
  bool query = has_query(cfg_.architecture);
  bool grad_feat = cfg_.architecture == Architecture::kNeuroCoreQueryG;

  if (query) {
    int q_in = qs ? d + r : 2 * d + r;
    mlp_q_ = Mlp(std::vector<int>{q_in, d, d}, init_rng);
  }
  int c_in = qs ? 2 * d : (query ? 3 * d : 2 * d);
  mlp_c_ = Mlp(std::vector<int>{c_in, d, d}, init_rng);
  int v_in = qs ? 4 * d : (grad_feat ? 4 * d : 3 * d);
  mlp_v_ = Mlp(std::vector<int>{v_in, d, d, d}, init_rng);
  int o_in = qs ? d : 2 * d;
  mlp_o_ = Mlp(std::vector<int>{o_in, d, u}, init_rng);

  if (query) mlp_q_.collect("mlp_q", params_);
  mlp_c_.collect("mlp_c", params_);
  mlp_v_.collect(qs ? "mlp_v" : "mlp_l", params_);
  mlp_o_.collect("mlp_o", params_);
}

ModelState Model::initial_state(const Batch& batch) const {
  ModelState st;
  int var_rows =
      cfg_.architecture == Architecture::kQuerySat ? batch.graph.n : 2 * batch.graph.n;
  st.var_state = Tensor::full(var_rows, cfg_.d, 1.0f);
  st.clause_state = Tensor::full(batch.graph.m, cfg_.d, 1.0f);
  st.solved_mask.assign(batch.count(), 0);
  return st;
}

StepOutput Model::step(ModelState& state, const Batch& batch, const MatF& noise) const {
  int want_rows = cfg_.architecture == Architecture::kQuerySat ? batch.graph.n : 2 * batch.graph.n;
  if (state.var_state.rows() != want_rows || state.clause_state.rows() != batch.graph.m)
    throw ShapeError("model state does not match the batch");
  StepOutput out = cfg_.architecture == Architecture::kQuerySat
                       ? querysat_step(state, batch, noise)
                       : neurocore_step(state, batch, noise);
  ++state.step;
  return out;
}

StepOutput Model::querysat_step(ModelState& state, const Batch& batch, const MatF& noise) const {
  const FactorGraph& g = batch.graph;
  StepOutput out;
  Tensor v = state.var_state;
  Tensor c = state.clause_state;

  Tensor q_in = v;
  if (cfg_.r > 0) {
    Tensor t = Tensor::from_mat(noise);
    std::vector<Tensor> parts{v, t};
    q_in = ops::concat_cols(parts);
  }
  out.query = ops::sigmoid(mlp_q_.forward(q_in));
  out.query_eval = ops::clause_values(g, out.query);

  std::vector<Tensor> c_parts{c, out.query_eval};
  Tensor c_new = ops::pairnorm(mlp_c_.forward(ops::concat_cols(c_parts)), batch.clause_offsets);

  Tensor grad_feat =
      query_gradient_feature(g, out.query, cfg_.query_grad_mode, out.query_eval);
  std::vector<Tensor> v_parts{v, ops::sparse_matmul(g.pos, c_new),
                              ops::sparse_matmul(g.neg, c_new), grad_feat};
  Tensor v_new = ops::pairnorm(mlp_v_.forward(ops::concat_cols(v_parts)), batch.var_offsets);

  out.assignments = ops::sigmoid(mlp_o_.forward(v_new));
  state.var_state = ops::grad_scale(v_new, cfg_.alpha);
  state.clause_state = ops::grad_scale(c_new, cfg_.alpha);

  attach_loss(batch, state.solved_mask, out);
  return out;
}

StepOutput Model::neurocore_step(ModelState& state, const Batch& batch, const MatF& noise) const {
  const FactorGraph& g = batch.graph;
  int n = g.n;
  StepOutput out;
  Tensor l = state.var_state;  // 2n x d: positive literal rows, then negative
  Tensor c = state.clause_state;
  Tensor lpos = ops::slice_rows(l, 0, n);
  Tensor lneg = ops::slice_rows(l, n, 2 * n);

  bool query = has_query(cfg_.architecture);
  if (query) {
    std::vector<Tensor> q_parts{lpos, lneg};
    if (cfg_.r > 0) q_parts.push_back(Tensor::from_mat(noise));
    out.query = ops::sigmoid(mlp_q_.forward(ops::concat_cols(q_parts)));
    out.query_eval = ops::clause_values(g, out.query);
  }

  // literals-to-clauses: Bᵀ·L with B = [a_pos; a_neg]
  Tensor clause_msg =
      ops::add(ops::sparse_matmul(g.pos_t, lpos), ops::sparse_matmul(g.neg_t, lneg));
  std::vector<Tensor> c_parts{c, clause_msg};
  if (query) c_parts.push_back(out.query_eval);
  Tensor c_new = ops::pairnorm(mlp_c_.forward(ops::concat_cols(c_parts)), batch.clause_offsets);

  // clauses-to-literals: B·ĉ, plus each literal's complement row
  Tensor lit_msg =
      ops::concat_rows(ops::sparse_matmul(g.pos, c_new), ops::sparse_matmul(g.neg, c_new));
  Tensor flipped = ops::concat_rows(lneg, lpos);
  std::vector<Tensor> l_parts{l, lit_msg, flipped};
  if (cfg_.architecture == Architecture::kNeuroCoreQueryG) {
    Tensor grad_feat =
        query_gradient_feature(g, out.query, cfg_.query_grad_mode, out.query_eval);
    l_parts.push_back(ops::concat_rows(grad_feat, grad_feat));
  }

  // segment = owning instance, same for a literal's positive and negative rows
  std::vector<std::int32_t> lit_seg(static_cast<std::size_t>(2) * n);
  for (std::int32_t k = 0; k < batch.count(); ++k) {
    for (std::int32_t i = batch.var_offsets[k]; i < batch.var_offsets[k + 1]; ++i) {
      lit_seg[i] = k;
      lit_seg[n + i] = k;
    }
  }
  Tensor l_new =
      ops::pairnorm_by_row(mlp_v_.forward(ops::concat_cols(l_parts)), lit_seg, batch.count());

  std::vector<Tensor> o_parts{ops::slice_rows(l_new, 0, n), ops::slice_rows(l_new, n, 2 * n)};
  out.assignments = ops::sigmoid(mlp_o_.forward(ops::concat_cols(o_parts)));
  state.var_state = ops::grad_scale(l_new, cfg_.alpha);
  state.clause_state = ops::grad_scale(c_new, cfg_.alpha);

  attach_loss(batch, state.solved_mask, out);
  return out;
}

ForwardResult Model::forward(const Batch& batch, std::span<const CnfFormula> formulas, int steps,
                             RunMode mode, std::uint64_t noise_seed,
                             const StepObserver& observer) const {
  if (steps < 1) throw ConfigError("forward needs steps >= 1");
  if (static_cast<std::int32_t>(formulas.size()) != batch.count())
    throw ShapeError("one formula per batch instance required");

  std::unique_ptr<NoGradGuard> guard;
  if (mode == RunMode::kEval) guard = std::make_unique<NoGradGuard>();

  ForwardResult res;
  int count = batch.count();
  res.assignments.resize(count);
  res.exit_step.assign(count, -1);
  res.solved.assign(count, 0);

  ModelState state = initial_state(batch);
  MatF pass_noise;
  if (cfg_.noise_per_pass) pass_noise = step_noise(batch, cfg_.r, noise_seed, 0);

  std::vector<float> col;
  for (int s = 1; s <= steps; ++s) {
    MatF noise =
        cfg_.noise_per_pass ? pass_noise : step_noise(batch, cfg_.r, noise_seed, s - 1);
    StepOutput out = step(state, batch, noise);
    res.steps_run = s;
    res.step_losses.push_back(out.step_loss.item());

    if (mode == RunMode::kTrain) {
      if (!std::isfinite(out.step_loss.item())) {
        // name the first offending instance for the abort diagnostic
        for (int b = 0; b < count; ++b) {
          for (int j = 0; j < cfg_.u; ++j) {
            if (!std::isfinite(out.column_losses.at(b, j)))
              throw DataError("non-finite loss at step " + std::to_string(s) + ", instance " +
                              std::to_string(batch.instance_ids[b]));
          }
        }
        throw DataError("non-finite loss at step " + std::to_string(s));
      }
      res.total_loss = res.total_loss.defined() ? ops::add(res.total_loss, out.step_loss)
                                                : out.step_loss;
    }

    bool all_solved = true;
    for (int b = 0; b < count; ++b) {
      if (res.solved[b]) continue;
      int nb = batch.vars_of(b);
      col.resize(nb);
      int base = batch.var_offsets[b];
      int j = out.best_column[b];
      for (int i = 0; i < nb; ++i) col[i] = out.assignments.at(base + i, j);
      if (check_assignment(formulas[b], std::span<const float>(col)).satisfied) {
        res.solved[b] = 1;
        res.exit_step[b] = s;
        res.assignments[b] = round_assignment(std::span<const float>(col));
        state.solved_mask[b] = 1;
      } else {
        all_solved = false;
        if (s == steps) res.assignments[b] = round_assignment(std::span<const float>(col));
      }
    }
    if (observer) observer(s, out, state, batch);
    if (all_solved) break;
  }
  return res;
}

}  // namespace qsat
