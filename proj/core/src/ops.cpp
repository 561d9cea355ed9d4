#include "qsat/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

namespace qsat::ops {
namespace {

std::string shape_str(const Tensor& t) {
  return std::to_string(t.rows()) + "x" + std::to_string(t.cols());
}

[[noreturn]] void shape_fail(const char* op, const Tensor& a, const Tensor& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_str(a) + " and " +
                   shape_str(b));
}

// New op node. Parents and the backward hook are recorded only when some
// parent participates in differentiation and no NoGradGuard is active.
template <typename Backward>
Tensor make_op(int rows, int cols, std::initializer_list<Tensor> parents, Backward&& bw) {
  auto n = std::make_shared<Node>();
  n->rows = rows;
  n->cols = cols;
  n->data.resize(static_cast<std::size_t>(rows) * cols);
  if (!grad_disabled()) {
    bool req = false;
    for (const Tensor& p : parents) req = req || p.node()->requires_grad;
    if (req) {
      n->requires_grad = true;
      for (const Tensor& p : parents) n->parents.push_back(p.handle());
      n->backward_fn = std::forward<Backward>(bw);
    }
  }
  return Tensor(std::move(n));
}

bool wants_grad(const Node& parent) { return parent.requires_grad && !parent.grad.empty(); }

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) shape_fail("add", a, b);
  Tensor out = make_op(a.rows(), a.cols(), {a, b}, [](Node& n) {
    for (int k = 0; k < 2; ++k) {
      Node& p = *n.parents[k];
      if (!wants_grad(p)) continue;
      for (std::size_t i = 0; i < n.grad.size(); ++i) p.grad[i] += n.grad[i];
    }
  });
  const auto& av = a.data();
  const auto& bv = b.data();
  auto& ov = out.data();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] + bv[i];
  return out;
}

Tensor add_bias(const Tensor& x, const Tensor& b) {
  if (b.rows() != 1 || b.cols() != x.cols()) shape_fail("add_bias", x, b);
  int rows = x.rows(), cols = x.cols();
  Tensor out = make_op(rows, cols, {x, b}, [rows, cols](Node& n) {
    Node& px = *n.parents[0];
    Node& pb = *n.parents[1];
    if (wants_grad(px)) {
      for (std::size_t i = 0; i < n.grad.size(); ++i) px.grad[i] += n.grad[i];
    }
    if (wants_grad(pb)) {
      for (int c = 0; c < cols; ++c) {
        double acc = 0.0;
        for (int r = 0; r < rows; ++r) acc += n.grad[static_cast<std::size_t>(r) * cols + c];
        pb.grad[c] += static_cast<float>(acc);
      }
    }
  });
  const auto& xv = x.data();
  const auto& bv = b.data();
  auto& ov = out.data();
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c)
      ov[static_cast<std::size_t>(r) * cols + c] = xv[static_cast<std::size_t>(r) * cols + c] + bv[c];
  }
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) shape_fail("mul", a, b);
  Tensor out = make_op(a.rows(), a.cols(), {a, b}, [](Node& n) {
    Node& pa = *n.parents[0];
    Node& pb = *n.parents[1];
    if (wants_grad(pa)) {
      for (std::size_t i = 0; i < n.grad.size(); ++i) pa.grad[i] += n.grad[i] * pb.data[i];
    }
    if (wants_grad(pb)) {
      for (std::size_t i = 0; i < n.grad.size(); ++i) pb.grad[i] += n.grad[i] * pa.data[i];
    }
  });
  const auto& av = a.data();
  const auto& bv = b.data();
  auto& ov = out.data();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] * bv[i];
  return out;
}

Tensor scale(const Tensor& x, float c) {
  Tensor out = make_op(x.rows(), x.cols(), {x}, [c](Node& n) {
    Node& p = *n.parents[0];
    if (!wants_grad(p)) return;
    for (std::size_t i = 0; i < n.grad.size(); ++i) p.grad[i] += c * n.grad[i];
  });
  const auto& xv = x.data();
  auto& ov = out.data();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = c * xv[i];
  return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) shape_fail("matmul", a, b);
  int N = a.rows(), K = a.cols(), M = b.cols();
  Tensor out = make_op(N, M, {a, b}, [N, K, M](Node& n) {
    Node& pa = *n.parents[0];
    Node& pb = *n.parents[1];
    const float* G = n.grad.data();
    if (wants_grad(pa)) {
      // dA[i,k] = sum_j G[i,j] * B[k,j] : row-of-G dot row-of-B
      const float* B = pb.data.data();
      for (int i = 0; i < N; ++i) {
        const float* gi = G + static_cast<std::size_t>(i) * M;
        float* dai = pa.grad.data() + static_cast<std::size_t>(i) * K;
        for (int k = 0; k < K; ++k) {
          const float* bk = B + static_cast<std::size_t>(k) * M;
          double acc = 0.0;
          for (int j = 0; j < M; ++j) acc += static_cast<double>(gi[j]) * bk[j];
          dai[k] += static_cast<float>(acc);
        }
      }
    }
    if (wants_grad(pb)) {
      // dB[k,j] += A[i,k] * G[i,j], i-k-j order keeps the inner loop contiguous
      const float* A = pa.data.data();
      float* dB = pb.grad.data();
      for (int i = 0; i < N; ++i) {
        const float* ai = A + static_cast<std::size_t>(i) * K;
        const float* gi = G + static_cast<std::size_t>(i) * M;
        for (int k = 0; k < K; ++k) {
          float aik = ai[k];
          if (aik == 0.0f) continue;
          float* dbk = dB + static_cast<std::size_t>(k) * M;
          for (int j = 0; j < M; ++j) dbk[j] += aik * gi[j];
        }
      }
    }
  });
  const float* A = a.data().data();
  const float* B = b.data().data();
  float* C = out.data().data();
  for (int i = 0; i < N; ++i) {
    float* ci = C + static_cast<std::size_t>(i) * M;
    const float* ai = A + static_cast<std::size_t>(i) * K;
    for (int k = 0; k < K; ++k) {
      float aik = ai[k];
      const float* bk = B + static_cast<std::size_t>(k) * M;
      for (int j = 0; j < M; ++j) ci[j] += aik * bk[j];
    }
  }
  return out;
}

Tensor sparse_matmul(const SparseMat& a, const Tensor& x, bool transpose) {
  int out_rows = transpose ? a.cols : a.rows;
  int in_rows = transpose ? a.rows : a.cols;
  if (x.rows() != in_rows)
    throw ShapeError("sparse_matmul: pattern expects " + std::to_string(in_rows) +
                     " input rows, got " + std::to_string(x.rows()));
  int d = x.cols();
  const SparseMat* ap = &a;  // patterns outlive the graph (owned by the batch)
  Tensor out = make_op(out_rows, d, {x}, [ap, d, transpose](Node& n) {
    Node& px = *n.parents[0];
    if (!wants_grad(px)) return;
    const float* G = n.grad.data();
    float* dx = px.grad.data();
    // grad_x = patternᵀ·G (forward a·x) or pattern·G (forward aᵀ·x)
    for (std::int32_t i = 0; i < ap->rows; ++i) {
      for (std::int32_t p = ap->row_ptr[i]; p < ap->row_ptr[i + 1]; ++p) {
        std::int32_t j = ap->col_idx[p];
        std::int32_t src = transpose ? j : i;
        std::int32_t dst = transpose ? i : j;
        const float* gs = G + static_cast<std::size_t>(src) * d;
        float* dd = dx + static_cast<std::size_t>(dst) * d;
        for (int c = 0; c < d; ++c) dd[c] += gs[c];
      }
    }
  });
  const float* X = x.data().data();
  float* O = out.data().data();
  std::memset(O, 0, out.size() * sizeof(float));
  for (std::int32_t i = 0; i < a.rows; ++i) {
    for (std::int32_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
      std::int32_t j = a.col_idx[p];
      std::int32_t src = transpose ? i : j;
      std::int32_t dst = transpose ? j : i;
      const float* xs = X + static_cast<std::size_t>(src) * d;
      float* od = O + static_cast<std::size_t>(dst) * d;
      for (int c = 0; c < d; ++c) od[c] += xs[c];
    }
  }
  return out;
}

Tensor sigmoid(const Tensor& x) {
  Tensor out = make_op(x.rows(), x.cols(), {x}, [](Node& n) {
    Node& p = *n.parents[0];
    if (!wants_grad(p)) return;
    for (std::size_t i = 0; i < n.grad.size(); ++i) {
      float y = n.data[i];
      p.grad[i] += n.grad[i] * y * (1.0f - y);
    }
  });
  const auto& xv = x.data();
  auto& ov = out.data();
  for (std::size_t i = 0; i < ov.size(); ++i)
    ov[i] = static_cast<float>(1.0 / (1.0 + std::exp(-static_cast<double>(xv[i]))));
  return out;
}

Tensor leaky_relu(const Tensor& x, float slope) {
  Tensor out = make_op(x.rows(), x.cols(), {x}, [slope](Node& n) {
    Node& p = *n.parents[0];
    if (!wants_grad(p)) return;
    for (std::size_t i = 0; i < n.grad.size(); ++i)
      p.grad[i] += n.grad[i] * (p.data[i] > 0.0f ? 1.0f : slope);
  });
  const auto& xv = x.data();
  auto& ov = out.data();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = xv[i] > 0.0f ? xv[i] : slope * xv[i];
  return out;
}

Tensor clamped_log(const Tensor& x, float eps) {
  Tensor out = make_op(x.rows(), x.cols(), {x}, [eps](Node& n) {
    Node& p = *n.parents[0];
    if (!wants_grad(p)) return;
    for (std::size_t i = 0; i < n.grad.size(); ++i)
      p.grad[i] += n.grad[i] / std::max(p.data[i], eps);
  });
  const auto& xv = x.data();
  auto& ov = out.data();
  for (std::size_t i = 0; i < ov.size(); ++i)
    ov[i] = std::log(std::max(xv[i], eps));
  return out;
}

Tensor sum(const Tensor& x) {
  Tensor out = make_op(1, 1, {x}, [](Node& n) {
    Node& p = *n.parents[0];
    if (!wants_grad(p)) return;
    float g = n.grad[0];
    for (std::size_t i = 0; i < p.grad.size(); ++i) p.grad[i] += g;
  });
  double acc = 0.0;
  for (float v : x.data()) acc += v;
  out.data()[0] = static_cast<float>(acc);
  return out;
}

Tensor mean(const Tensor& x) {
  if (x.size() == 0) throw ShapeError("mean of empty tensor");
  std::size_t count = x.size();
  Tensor out = make_op(1, 1, {x}, [count](Node& n) {
    Node& p = *n.parents[0];
    if (!wants_grad(p)) return;
    float g = n.grad[0] / static_cast<float>(count);
    for (std::size_t i = 0; i < p.grad.size(); ++i) p.grad[i] += g;
  });
  double acc = 0.0;
  for (float v : x.data()) acc += v;
  out.data()[0] = static_cast<float>(acc / static_cast<double>(count));
  return out;
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat_cols of nothing");
  int rows = parts[0].rows();
  int cols = 0;
  for (const Tensor& p : parts) {
    if (p.rows() != rows) shape_fail("concat_cols", parts[0], p);
    cols += p.cols();
  }
  auto n = std::make_shared<Node>();
  n->rows = rows;
  n->cols = cols;
  n->data.resize(static_cast<std::size_t>(rows) * cols);
  std::vector<int> widths;
  bool req = false;
  for (const Tensor& p : parts) {
    widths.push_back(p.cols());
    req = req || p.node()->requires_grad;
  }
  if (!grad_disabled() && req) {
    n->requires_grad = true;
    for (const Tensor& p : parts) n->parents.push_back(p.handle());
    n->backward_fn = [rows, cols, widths](Node& nn) {
      int off = 0;
      for (std::size_t k = 0; k < nn.parents.size(); ++k) {
        Node& p = *nn.parents[k];
        int w = widths[k];
        if (wants_grad(p)) {
          for (int r = 0; r < rows; ++r) {
            const float* src = nn.grad.data() + static_cast<std::size_t>(r) * cols + off;
            float* dst = p.grad.data() + static_cast<std::size_t>(r) * w;
            for (int c = 0; c < w; ++c) dst[c] += src[c];
          }
        }
        off += w;
      }
    };
  }
  int off = 0;
  for (const Tensor& p : parts) {
    int w = p.cols();
    for (int r = 0; r < rows; ++r) {
      std::memcpy(n->data.data() + static_cast<std::size_t>(r) * cols + off,
                  p.data().data() + static_cast<std::size_t>(r) * w,
                  static_cast<std::size_t>(w) * sizeof(float));
    }
    off += w;
  }
  return Tensor(std::move(n));
}

Tensor concat_rows(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.cols()) shape_fail("concat_rows", a, b);
  int ra = a.rows(), rb = b.rows(), cols = a.cols();
  Tensor out = make_op(ra + rb, cols, {a, b}, [ra, rb, cols](Node& n) {
    Node& pa = *n.parents[0];
    Node& pb = *n.parents[1];
    std::size_t na = static_cast<std::size_t>(ra) * cols;
    if (wants_grad(pa)) {
      for (std::size_t i = 0; i < na; ++i) pa.grad[i] += n.grad[i];
    }
    if (wants_grad(pb)) {
      for (std::size_t i = 0; i < static_cast<std::size_t>(rb) * cols; ++i)
        pb.grad[i] += n.grad[na + i];
    }
  });
  std::memcpy(out.data().data(), a.data().data(), a.size() * sizeof(float));
  std::memcpy(out.data().data() + a.size(), b.data().data(), b.size() * sizeof(float));
  return out;
}

Tensor slice_rows(const Tensor& x, int r0, int r1) {
  if (r0 < 0 || r1 < r0 || r1 > x.rows())
    throw ShapeError("slice_rows: [" + std::to_string(r0) + "," + std::to_string(r1) +
                     ") out of range for " + shape_str(x));
  int cols = x.cols();
  Tensor out = make_op(r1 - r0, cols, {x}, [r0, cols](Node& n) {
    Node& p = *n.parents[0];
    if (!wants_grad(p)) return;
    float* dst = p.grad.data() + static_cast<std::size_t>(r0) * cols;
    for (std::size_t i = 0; i < n.grad.size(); ++i) dst[i] += n.grad[i];
  });
  std::memcpy(out.data().data(), x.data().data() + static_cast<std::size_t>(r0) * cols,
              out.size() * sizeof(float));
  return out;
}

Tensor pairnorm_by_row(const Tensor& x, std::span<const std::int32_t> seg_of_row, int num_segs) {
  if (static_cast<int>(seg_of_row.size()) != x.rows())
    throw ShapeError("pairnorm: one segment id per row required");
  if (num_segs < 1) throw ShapeError("pairnorm: need at least one segment");
  constexpr double kS = 1.0;
  constexpr double kEps = 1e-5;
  int d = x.cols();

  // Per-segment statistics, shared between forward and backward.
  struct Stats {
    std::vector<std::int32_t> seg;
    std::vector<std::int32_t> rows;  // row count per segment
    std::vector<double> colmean;     // num_segs x d
    std::vector<double> tau;         // num_segs
  };
  auto st = std::make_shared<Stats>();
  st->seg.assign(seg_of_row.begin(), seg_of_row.end());
  st->rows.assign(num_segs, 0);
  st->colmean.assign(static_cast<std::size_t>(num_segs) * d, 0.0);
  st->tau.assign(num_segs, 1.0);
  for (std::int32_t s : st->seg) {
    if (s < 0 || s >= num_segs) throw ShapeError("pairnorm: segment id out of range");
    ++st->rows[s];
  }
  for (int s = 0; s < num_segs; ++s) {
    if (st->rows[s] == 0) throw ShapeError("pairnorm: empty segment");
  }

  Tensor out = make_op(x.rows(), d, {x}, [st, d](Node& n) {
    Node& p = *n.parents[0];
    if (!wants_grad(p)) return;
    int nrows = p.rows;
    int nsegs = static_cast<int>(st->tau.size());
    // dot_s = sum G . xhat over segment s
    std::vector<double> dot(nsegs, 0.0);
    for (int r = 0; r < nrows; ++r) {
      int s = st->seg[r];
      const double* mu = st->colmean.data() + static_cast<std::size_t>(s) * d;
      const float* g = n.grad.data() + static_cast<std::size_t>(r) * d;
      const float* xv = p.data.data() + static_cast<std::size_t>(r) * d;
      double acc = 0.0;
      for (int c = 0; c < d; ++c) acc += g[c] * (xv[c] - mu[c]);
      dot[s] += acc;
    }
    // dL/dxhat = (s/tau) G - (s/(tau^3 N d)) dot xhat ; then center per column
    std::vector<double> k1(nsegs), k2(nsegs);
    for (int s = 0; s < nsegs; ++s) {
      double tau = st->tau[s];
      double nd = static_cast<double>(st->rows[s]) * d;
      k1[s] = kS / tau;
      k2[s] = kS * dot[s] / (tau * tau * tau * nd);
    }
    std::vector<double> dxhat_mean(static_cast<std::size_t>(nsegs) * d, 0.0);
    for (int r = 0; r < nrows; ++r) {
      int s = st->seg[r];
      const double* mu = st->colmean.data() + static_cast<std::size_t>(s) * d;
      double* dm = dxhat_mean.data() + static_cast<std::size_t>(s) * d;
      const float* g = n.grad.data() + static_cast<std::size_t>(r) * d;
      const float* xv = p.data.data() + static_cast<std::size_t>(r) * d;
      for (int c = 0; c < d; ++c) dm[c] += k1[s] * g[c] - k2[s] * (xv[c] - mu[c]);
    }
    for (int s = 0; s < nsegs; ++s) {
      double* dm = dxhat_mean.data() + static_cast<std::size_t>(s) * d;
      for (int c = 0; c < d; ++c) dm[c] /= st->rows[s];
    }
    for (int r = 0; r < nrows; ++r) {
      int s = st->seg[r];
      const double* mu = st->colmean.data() + static_cast<std::size_t>(s) * d;
      const double* dm = dxhat_mean.data() + static_cast<std::size_t>(s) * d;
      const float* g = n.grad.data() + static_cast<std::size_t>(r) * d;
      const float* xv = p.data.data() + static_cast<std::size_t>(r) * d;
      float* dx = p.grad.data() + static_cast<std::size_t>(r) * d;
      for (int c = 0; c < d; ++c)
        dx[c] += static_cast<float>(k1[s] * g[c] - k2[s] * (xv[c] - mu[c]) - dm[c]);
    }
  });

  const float* X = x.data().data();
  float* O = out.data().data();
  for (int r = 0; r < x.rows(); ++r) {
    double* mu = st->colmean.data() + static_cast<std::size_t>(st->seg[r]) * d;
    const float* xv = X + static_cast<std::size_t>(r) * d;
    for (int c = 0; c < d; ++c) mu[c] += xv[c];
  }
  for (int s = 0; s < num_segs; ++s) {
    double* mu = st->colmean.data() + static_cast<std::size_t>(s) * d;
    for (int c = 0; c < d; ++c) mu[c] /= st->rows[s];
  }
  std::vector<double> sq(num_segs, 0.0);
  for (int r = 0; r < x.rows(); ++r) {
    int s = st->seg[r];
    const double* mu = st->colmean.data() + static_cast<std::size_t>(s) * d;
    const float* xv = X + static_cast<std::size_t>(r) * d;
    double acc = 0.0;
    for (int c = 0; c < d; ++c) {
      double h = xv[c] - mu[c];
      acc += h * h;
    }
    sq[s] += acc;
  }
  for (int s = 0; s < num_segs; ++s)
    st->tau[s] = std::sqrt(sq[s] / (static_cast<double>(st->rows[s]) * d) + kEps);
  for (int r = 0; r < x.rows(); ++r) {
    int s = st->seg[r];
    const double* mu = st->colmean.data() + static_cast<std::size_t>(s) * d;
    double k = kS / st->tau[s];
    const float* xv = X + static_cast<std::size_t>(r) * d;
    float* ov = O + static_cast<std::size_t>(r) * d;
    for (int c = 0; c < d; ++c) ov[c] = static_cast<float>(k * (xv[c] - mu[c]));
  }
  return out;
}

Tensor pairnorm(const Tensor& x, std::span<const std::int32_t> offsets) {
  if (offsets.size() < 2 || offsets.front() != 0 || offsets.back() != x.rows())
    throw ShapeError("pairnorm: segment offsets must cover all rows");
  int segs = static_cast<int>(offsets.size()) - 1;
  std::vector<std::int32_t> seg_of_row(x.rows());
  for (int s = 0; s < segs; ++s) {
    for (std::int32_t r = offsets[s]; r < offsets[s + 1]; ++r) seg_of_row[r] = s;
  }
  return pairnorm_by_row(x, seg_of_row, segs);
}

Tensor grad_scale(const Tensor& x, float alpha) {
  if (alpha < 0.0f || alpha > 1.0f) throw ConfigError("grad_scale alpha must be in [0,1]");
  Tensor out = make_op(x.rows(), x.cols(), {x}, [alpha](Node& n) {
    Node& p = *n.parents[0];
    if (!wants_grad(p)) return;
    float k = 1.0f - alpha;
    for (std::size_t i = 0; i < n.grad.size(); ++i) p.grad[i] += k * n.grad[i];
  });
  out.data() = x.data();
  return out;
}

Tensor stop_gradient(const Tensor& x) {
  auto n = std::make_shared<Node>();
  n->rows = x.rows();
  n->cols = x.cols();
  n->data = x.data();
  return Tensor(std::move(n));
}

Tensor clause_values(const FactorGraph& g, const Tensor& q) {
  if (q.rows() != g.n)
    throw ShapeError("clause_values: expected " + std::to_string(g.n) + " rows, got " +
                     std::to_string(q.rows()));
  const FactorGraph* gp = &g;  // the batch owns the graph across the pass
  Tensor out = make_op(g.m, q.cols(), {q}, [gp](Node& n) {
    Node& p = *n.parents[0];
    if (!wants_grad(p)) return;
    MatF up(n.rows, n.cols);
    up.v = n.grad;
    MatF qm(p.rows, p.cols);
    qm.v = p.data;
    MatF gq(p.rows, p.cols);
    clause_value_backward(*gp, qm, up, gq);
    for (std::size_t i = 0; i < p.grad.size(); ++i) p.grad[i] += gq.v[i];
  });
  MatF vals = per_clause_losses(g, q.to_mat());
  out.data() = std::move(vals.v);
  return out;
}

Tensor segment_log_loss(const Tensor& values, std::span<const std::int32_t> clause_offsets) {
  if (clause_offsets.size() < 2 || clause_offsets.front() != 0 ||
      clause_offsets.back() != values.rows())
    throw ShapeError("segment_log_loss: offsets must cover all clause rows");
  int u = values.cols();
  int count = static_cast<int>(clause_offsets.size()) - 1;
  auto offs = std::make_shared<std::vector<std::int32_t>>(clause_offsets.begin(),
                                                          clause_offsets.end());
  Tensor out = make_op(count, u, {values}, [offs, u](Node& n) {
    Node& p = *n.parents[0];
    if (!wants_grad(p)) return;
    int nb = static_cast<int>(offs->size()) - 1;
    const float eps = static_cast<float>(kLossEps);
    for (int b = 0; b < nb; ++b) {
      const float* g = n.grad.data() + static_cast<std::size_t>(b) * u;
      for (std::int32_t c = (*offs)[b]; c < (*offs)[b + 1]; ++c) {
        const float* val = p.data.data() + static_cast<std::size_t>(c) * u;
        float* dv = p.grad.data() + static_cast<std::size_t>(c) * u;
        for (int j = 0; j < u; ++j) dv[j] += -g[j] / std::max(val[j], eps);
      }
    }
  });
  MatF l = qsat::segment_log_loss(values.to_mat(), clause_offsets);
  out.data() = std::move(l.v);
  return out;
}

Tensor multi_assignment_loss(const Tensor& column_losses, std::span<const std::uint8_t> mask) {
  int count = column_losses.rows();
  int u = column_losses.cols();
  if (static_cast<int>(mask.size()) != count)
    throw ShapeError("multi_assignment_loss: one mask entry per row required");
  // Per-entry normalized weights, fixed at forward time; masked rows stay 0.
  auto weights = std::make_shared<std::vector<float>>(static_cast<std::size_t>(count) * u, 0.0f);
  double wsum = 0.0;
  for (int j = 1; j <= u; ++j) wsum += static_cast<double>(j) * j;

  Tensor out = make_op(1, 1, {column_losses}, [weights](Node& n) {
    Node& p = *n.parents[0];
    if (!wants_grad(p)) return;
    float g = n.grad[0];
    for (std::size_t i = 0; i < p.grad.size(); ++i) p.grad[i] += g * (*weights)[i];
  });

  const float* L = column_losses.data().data();
  double total = 0.0;
  std::vector<int> order(u);
  for (int b = 0; b < count; ++b) {
    if (mask[b]) continue;
    const float* row = L + static_cast<std::size_t>(b) * u;
    for (int j = 0; j < u; ++j) order[j] = j;
    std::stable_sort(order.begin(), order.end(),
                     [row](int a, int bb) { return row[a] > row[bb]; });
    float* w = weights->data() + static_cast<std::size_t>(b) * u;
    double acc = 0.0;
    for (int k = 0; k < u; ++k) {
      double wk = static_cast<double>(k + 1) * (k + 1) / wsum;
      w[order[k]] = static_cast<float>(wk);
      acc += wk * row[order[k]];
    }
    total += acc;
  }
  out.data()[0] = static_cast<float>(total);
  return out;
}

}  // namespace qsat::ops
