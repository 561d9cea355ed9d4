#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"

#include "qsat/error.hpp"
#include "qsat/graph.hpp"
#include "qsat/loss.hpp"
#include "qsat/nn.hpp"
#include "qsat/ops.hpp"
#include "qsat/rng.hpp"
#include "qsat/tensor.hpp"

using namespace qsat;
using qsat::testing::rel_err;

namespace {

Tensor random_leaf(int rows, int cols, Rng& rng, bool requires_grad = true) {
  Tensor t = Tensor::leaf(rows, cols, requires_grad);
  for (float& v : t.data()) v = static_cast<float>(2.0 * rng.uniform() - 1.0);
  return t;
}

MatF random_mat(int rows, int cols, Rng& rng) {
  MatF m(rows, cols);
  for (float& v : m.v) v = static_cast<float>(2.0 * rng.uniform() - 1.0);
  return m;
}

// Weighted scalar readout sum(x * w); breaks the symmetry an all-ones
// reduction would leave between rows.
Tensor readout(const Tensor& x, const MatF& w) {
  return ops::sum(ops::mul(x, Tensor::from_mat(w)));
}

// Double-precision mirror of Mlp + grad_scale + segmented PairNorm + Mlp,
// used as the finite-difference oracle. grad_scale is the identity here;
// the autodiff gradient of everything upstream of it is expected to be
// (1 - alpha) times this oracle's derivative.
struct NetOracle {
  std::vector<std::vector<double>> wa, ba;  // first stack, layer-major
  std::vector<std::vector<double>> wb, bb;  // second stack
  std::vector<int> widths_a, widths_b;
  std::vector<std::int32_t> offsets;
  std::vector<double> ro;  // readout weights, row-major rows x out
  double slope = 0.01;

  static std::vector<double> to_double(const std::vector<float>& v) {
    return std::vector<double>(v.begin(), v.end());
  }

  std::vector<double> stack(const std::vector<std::vector<double>>& w,
                            const std::vector<std::vector<double>>& b,
                            const std::vector<int>& widths, std::vector<double> x,
                            int rows) const {
    for (std::size_t l = 0; l < w.size(); ++l) {
      const int in = widths[l];
      const int out = widths[l + 1];
      std::vector<double> y(static_cast<std::size_t>(rows) * out);
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < out; ++c) {
          double acc = b[l][static_cast<std::size_t>(c)];
          for (int k = 0; k < in; ++k)
            acc += x[static_cast<std::size_t>(r) * in + k] * w[l][static_cast<std::size_t>(k) * out + c];
          if (l + 1 < w.size() && acc < 0.0) acc *= slope;
          y[static_cast<std::size_t>(r) * out + c] = acc;
        }
      }
      x = std::move(y);
    }
    return x;
  }

  std::vector<double> pairnorm(std::vector<double> x, int d) const {
    for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
      const int r0 = offsets[s];
      const int r1 = offsets[s + 1];
      std::vector<double> mu(static_cast<std::size_t>(d), 0.0);
      for (int r = r0; r < r1; ++r)
        for (int c = 0; c < d; ++c) mu[static_cast<std::size_t>(c)] += x[static_cast<std::size_t>(r) * d + c];
      for (double& m : mu) m /= (r1 - r0);
      double sq = 0.0;
      for (int r = r0; r < r1; ++r) {
        for (int c = 0; c < d; ++c) {
          const double h = x[static_cast<std::size_t>(r) * d + c] - mu[static_cast<std::size_t>(c)];
          sq += h * h;
        }
      }
      const double tau = std::sqrt(sq / (static_cast<double>(r1 - r0) * d) + 1e-5);
      for (int r = r0; r < r1; ++r)
        for (int c = 0; c < d; ++c)
          x[static_cast<std::size_t>(r) * d + c] =
              (x[static_cast<std::size_t>(r) * d + c] - mu[static_cast<std::size_t>(c)]) / tau;
    }
    return x;
  }

  double loss(const std::vector<double>& input, int rows) const {
    std::vector<double> h = stack(wa, ba, widths_a, input, rows);
    h = pairnorm(std::move(h), widths_a.back());
    h = stack(wb, bb, widths_b, std::move(h), rows);
    double acc = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) acc += h[i] * ro[i];
    return acc;
  }

  // Central difference over one flattened vector inside the oracle.
  std::vector<double> fd(std::vector<double>& target, const std::vector<double>& input, int rows) {
    std::vector<double> g(target.size());
    for (std::size_t i = 0; i < target.size(); ++i) {
      const double v = target[i];
      const double h = 1e-6 * std::max(1.0, std::abs(v));
      target[i] = v + h;
      const double lp = loss(input, rows);
      target[i] = v - h;
      const double lm = loss(input, rows);
      target[i] = v;
      g[i] = (lp - lm) / (2.0 * h);
    }
    return g;
  }
};

// Entries where both sides sit below float roundoff are exempt from the
// relative check; a bias feeding straight into the normalizer has an exactly
// zero gradient and only noise survives on either side.
void check_close(const std::vector<float>& got, const std::vector<double>& want, double tol,
                 const char* label = "") {
  REQUIRE(got.size() == want.size());
  double scale = 1e-8;
  for (double w : want) scale = std::max(scale, std::abs(w));
  for (std::size_t i = 0; i < got.size(); ++i) {
    if (std::abs(got[i]) < 1e-5 && std::abs(want[i]) < 1e-5) continue;
    INFO(std::string(label) << "[" << i << "] got " << got[i] << " want " << want[i]);
    CHECK(std::abs(got[i] - want[i]) / scale < tol);
  }
}

}  // namespace

TEST_CASE("tensor constructors produce the advertised shapes") {
  Tensor z = Tensor::zeros(3, 4);
  CHECK(z.rows() == 3);
  CHECK(z.cols() == 4);
  for (float v : z.data()) CHECK(v == 0.0f);

  Tensor f = Tensor::full(2, 2, 1.5f);
  for (float v : f.data()) CHECK(v == 1.5f);

  CHECK(Tensor::scalar(3.0f).item() == 3.0f);
  CHECK_THROWS_AS((void)f.item(), ShapeError);

  MatF m(2, 3);
  for (int i = 0; i < 6; ++i) m.v[static_cast<std::size_t>(i)] = static_cast<float>(i);
  Tensor t = Tensor::from_mat(m);
  CHECK(t.at(1, 2) == 5.0f);
  CHECK(t.to_mat() == m);
}

TEST_CASE("elementwise ops have their closed-form gradients") {
  Rng rng(7);
  Tensor a = random_leaf(3, 4, rng);
  Tensor b = random_leaf(3, 4, rng);
  MatF w = random_mat(3, 4, rng);

  SUBCASE("add routes the upstream weights to both parents") {
    backward(readout(ops::add(a, b), w));
    for (std::size_t i = 0; i < w.v.size(); ++i) {
      CHECK(a.grad()[i] == w.v[i]);
      CHECK(b.grad()[i] == w.v[i]);
    }
  }
  SUBCASE("mul swaps the operands in the backward pass") {
    backward(readout(ops::mul(a, b), w));
    for (std::size_t i = 0; i < w.v.size(); ++i) {
      CHECK(a.grad()[i] == doctest::Approx(w.v[i] * b.data()[i]).epsilon(1e-6));
      CHECK(b.grad()[i] == doctest::Approx(w.v[i] * a.data()[i]).epsilon(1e-6));
    }
  }
  SUBCASE("scale multiplies both directions by the constant") {
    Tensor y = ops::scale(a, -2.5f);
    for (std::size_t i = 0; i < y.data().size(); ++i) CHECK(y.data()[i] == -2.5f * a.data()[i]);
    backward(readout(y, w));
    for (std::size_t i = 0; i < w.v.size(); ++i)
      CHECK(a.grad()[i] == doctest::Approx(-2.5f * w.v[i]).epsilon(1e-6));
  }
  SUBCASE("sigmoid derivative is s(1-s)") {
    Tensor y = ops::sigmoid(a);
    backward(readout(y, w));
    for (std::size_t i = 0; i < w.v.size(); ++i) {
      const double s = 1.0 / (1.0 + std::exp(-static_cast<double>(a.data()[i])));
      CHECK(y.data()[i] == doctest::Approx(s).epsilon(1e-6));
      CHECK(a.grad()[i] == doctest::Approx(w.v[i] * s * (1.0 - s)).epsilon(1e-5));
    }
  }
  SUBCASE("leaky relu keeps the slope on the negative side") {
    Tensor y = ops::leaky_relu(a, 0.01f);
    backward(readout(y, w));
    for (std::size_t i = 0; i < w.v.size(); ++i) {
      const float x = a.data()[i];
      CHECK(y.data()[i] == (x >= 0.0f ? x : 0.01f * x));
      CHECK(a.grad()[i] == doctest::Approx(w.v[i] * (x >= 0.0f ? 1.0 : 0.01)).epsilon(1e-6));
    }
  }
  SUBCASE("shape mismatches are rejected") {
    Tensor c = Tensor::zeros(2, 4);
    CHECK_THROWS_AS((void)ops::add(a, c), ShapeError);
    CHECK_THROWS_AS((void)ops::mul(a, c), ShapeError);
  }
}

TEST_CASE("clamped log floors both the value and the reciprocal") {
  Tensor x = Tensor::leaf(1, 3, true);
  x.data() = {0.25f, 1.0f, 0.0f};
  Tensor y = ops::clamped_log(x, 0.5f);
  CHECK(y.data()[0] == doctest::Approx(std::log(0.5)).epsilon(1e-6));
  CHECK(y.data()[1] == 0.0f);
  CHECK(y.data()[2] == doctest::Approx(std::log(0.5)).epsilon(1e-6));
  backward(ops::sum(y));
  CHECK(x.grad()[0] == doctest::Approx(2.0).epsilon(1e-6));  // floored reciprocal
  CHECK(x.grad()[1] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(x.grad()[2] == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("sum and mean reduce with uniform gradients") {
  Rng rng(11);
  Tensor a = random_leaf(4, 5, rng);
  double want = 0.0;
  for (float v : a.data()) want += v;

  Tensor s = ops::sum(a);
  CHECK(s.item() == doctest::Approx(want).epsilon(1e-6));
  backward(s);
  for (float g : a.grad()) CHECK(g == 1.0f);

  Tensor b = random_leaf(4, 5, rng);
  double want_b = 0.0;
  for (float v : b.data()) want_b += v;
  Tensor m = ops::mean(b);
  CHECK(m.item() == doctest::Approx(want_b / 20.0).epsilon(1e-5));
  backward(m);
  for (float g : b.grad()) CHECK(g == doctest::Approx(1.0 / 20.0).epsilon(1e-6));
}

TEST_CASE("matmul gradients follow the transpose rule") {
  Rng rng(13);
  Tensor a = random_leaf(3, 4, rng);
  Tensor b = random_leaf(4, 2, rng);
  MatF w = random_mat(3, 2, rng);
  Tensor y = ops::matmul(a, b);

  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 2; ++c) {
      double acc = 0.0;
      for (int k = 0; k < 4; ++k) acc += static_cast<double>(a.at(r, k)) * b.at(k, c);
      CHECK(y.at(r, c) == doctest::Approx(acc).epsilon(1e-5));
    }
  }

  backward(readout(y, w));
  for (int r = 0; r < 3; ++r) {  // dA = W Bt
    for (int k = 0; k < 4; ++k) {
      double acc = 0.0;
      for (int c = 0; c < 2; ++c) acc += static_cast<double>(w.at(r, c)) * b.at(k, c);
      CHECK(rel_err(a.grad()[static_cast<std::size_t>(r) * 4 + k], acc) < 1e-5);
    }
  }
  for (int k = 0; k < 4; ++k) {  // dB = At W
    for (int c = 0; c < 2; ++c) {
      double acc = 0.0;
      for (int r = 0; r < 3; ++r) acc += static_cast<double>(a.at(r, k)) * w.at(r, c);
      CHECK(rel_err(b.grad()[static_cast<std::size_t>(k) * 2 + c], acc) < 1e-5);
    }
  }
  CHECK_THROWS_AS((void)ops::matmul(a, a), ShapeError);
}

TEST_CASE("add_bias broadcasts forward and column-sums backward") {
  Rng rng(17);
  Tensor x = random_leaf(5, 3, rng);
  Tensor bias = random_leaf(1, 3, rng);
  MatF w = random_mat(5, 3, rng);
  Tensor y = ops::add_bias(x, bias);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 3; ++c) CHECK(y.at(r, c) == x.at(r, c) + bias.at(0, c));

  backward(readout(y, w));
  for (std::size_t i = 0; i < w.v.size(); ++i) CHECK(x.grad()[i] == w.v[i]);
  for (int c = 0; c < 3; ++c) {
    double acc = 0.0;
    for (int r = 0; r < 5; ++r) acc += w.at(r, c);
    CHECK(bias.grad()[static_cast<std::size_t>(c)] == doctest::Approx(acc).epsilon(1e-6));
  }
}

TEST_CASE("sparse matmul agrees with the dense 0/1 product") {
  // Pattern rows x cols = 3 x 4:  {0,2}, {1}, {0,3}
  SparseMat a;
  a.rows = 3;
  a.cols = 4;
  a.row_ptr = {0, 2, 3, 5};
  a.col_idx = {0, 2, 1, 0, 3};

  Rng rng(19);
  Tensor x = random_leaf(4, 2, rng);
  Tensor xt = random_leaf(3, 2, rng);
  MatF w = random_mat(3, 2, rng);
  MatF wt = random_mat(4, 2, rng);

  const int dense[3][4] = {{1, 0, 1, 0}, {0, 1, 0, 0}, {1, 0, 0, 1}};

  Tensor y = ops::sparse_matmul(a, x);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 2; ++c) {
      double acc = 0.0;
      for (int k = 0; k < 4; ++k) acc += dense[r][k] * static_cast<double>(x.at(k, c));
      CHECK(y.at(r, c) == doctest::Approx(acc).epsilon(1e-6));
    }
  }
  backward(readout(y, w));
  for (int k = 0; k < 4; ++k) {  // dX = At W over the pattern
    for (int c = 0; c < 2; ++c) {
      double acc = 0.0;
      for (int r = 0; r < 3; ++r) acc += dense[r][k] * static_cast<double>(w.at(r, c));
      CHECK(x.grad()[static_cast<std::size_t>(k) * 2 + c] == doctest::Approx(acc).epsilon(1e-6));
    }
  }

  Tensor z = ops::sparse_matmul(a, xt, /*transpose=*/true);
  CHECK(z.rows() == 4);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 2; ++c) {
      double acc = 0.0;
      for (int k = 0; k < 3; ++k) acc += dense[k][r] * static_cast<double>(xt.at(k, c));
      CHECK(z.at(r, c) == doctest::Approx(acc).epsilon(1e-6));
    }
  }
  backward(readout(z, wt));
  for (int k = 0; k < 3; ++k) {
    for (int c = 0; c < 2; ++c) {
      double acc = 0.0;
      for (int r = 0; r < 4; ++r) acc += dense[k][r] * static_cast<double>(wt.at(r, c));
      CHECK(xt.grad()[static_cast<std::size_t>(k) * 2 + c] == doctest::Approx(acc).epsilon(1e-6));
    }
  }
}

TEST_CASE("concat and slice route gradients to the matching blocks") {
  Rng rng(23);
  Tensor a = random_leaf(3, 2, rng);
  Tensor b = random_leaf(3, 3, rng);
  Tensor c = random_leaf(3, 1, rng);

  std::vector<Tensor> parts{a, b, c};
  Tensor y = ops::concat_cols(parts);
  REQUIRE(y.cols() == 6);
  for (int r = 0; r < 3; ++r) {
    CHECK(y.at(r, 0) == a.at(r, 0));
    CHECK(y.at(r, 2) == b.at(r, 0));
    CHECK(y.at(r, 5) == c.at(r, 0));
  }
  MatF w = random_mat(3, 6, rng);
  backward(readout(y, w));
  for (int r = 0; r < 3; ++r) {
    for (int k = 0; k < 2; ++k) CHECK(a.grad()[static_cast<std::size_t>(r) * 2 + k] == w.at(r, k));
    for (int k = 0; k < 3; ++k)
      CHECK(b.grad()[static_cast<std::size_t>(r) * 3 + k] == w.at(r, 2 + k));
    CHECK(c.grad()[static_cast<std::size_t>(r)] == w.at(r, 5));
  }

  Tensor p = random_leaf(2, 3, rng);
  Tensor q = random_leaf(4, 3, rng);
  Tensor rows = ops::concat_rows(p, q);
  REQUIRE(rows.rows() == 6);
  Tensor mid = ops::slice_rows(rows, 1, 4);
  REQUIRE(mid.rows() == 3);
  CHECK(mid.at(0, 0) == p.at(1, 0));
  CHECK(mid.at(1, 0) == q.at(0, 0));
  MatF wm = random_mat(3, 3, rng);
  backward(readout(mid, wm));
  for (int k = 0; k < 3; ++k) {
    CHECK(p.grad()[static_cast<std::size_t>(0) * 3 + k] == 0.0f);
    CHECK(p.grad()[static_cast<std::size_t>(1) * 3 + k] == wm.at(0, k));
    CHECK(q.grad()[static_cast<std::size_t>(0) * 3 + k] == wm.at(1, k));
    CHECK(q.grad()[static_cast<std::size_t>(1) * 3 + k] == wm.at(2, k));
    CHECK(q.grad()[static_cast<std::size_t>(3) * 3 + k] == 0.0f);
  }
}

TEST_CASE("grad_scale is the identity forward and exactly 1-alpha backward") {
  Rng rng(29);
  Tensor x = random_leaf(4, 6, rng);
  Tensor y = ops::grad_scale(x, 0.2f);
  CHECK(y.data() == x.data());  // bit-for-bit

  MatF w = random_mat(4, 6, rng);
  backward(readout(y, w));
  for (std::size_t i = 0; i < w.v.size(); ++i) {
    CHECK(x.grad()[i] == (1.0f - 0.2f) * w.v[i]);  // exact float product
  }
  CHECK_THROWS_AS((void)ops::grad_scale(x, 1.5f), ConfigError);
  CHECK_THROWS_AS((void)ops::grad_scale(x, -0.1f), ConfigError);
}

TEST_CASE("stop_gradient blocks the backward pass") {
  Rng rng(31);
  Tensor x = random_leaf(3, 3, rng);
  Tensor y = ops::stop_gradient(x);
  CHECK(y.data() == x.data());
  backward(ops::sum(y));
  bool any = false;
  for (float g : x.grad()) any = any || g != 0.0f;
  CHECK_FALSE(any);
}

TEST_CASE("a reused tensor accumulates both gradient paths") {
  Tensor x = Tensor::leaf(1, 3, true);
  x.data() = {0.5f, -1.0f, 2.0f};
  backward(ops::sum(ops::mul(x, x)));
  for (int i = 0; i < 3; ++i) CHECK(x.grad()[static_cast<std::size_t>(i)] == 2.0f * x.data()[static_cast<std::size_t>(i)]);
}

TEST_CASE("gradients accumulate across backward calls until zeroed") {
  Tensor x = Tensor::leaf(1, 2, true);
  x.data() = {1.0f, 2.0f};
  backward(ops::sum(ops::scale(x, 3.0f)));
  backward(ops::sum(ops::scale(x, 3.0f)));
  CHECK(x.grad()[0] == 6.0f);
  Tensor x2(x.handle());
  x2.zero_grad();
  CHECK(x.grad()[0] == 0.0f);
}

TEST_CASE("no-grad scopes record no tape") {
  CHECK_FALSE(grad_disabled());
  Tensor x = Tensor::leaf(2, 2, true);
  x.data() = {1.0f, 2.0f, 3.0f, 4.0f};
  {
    NoGradGuard guard;
    CHECK(grad_disabled());
    Tensor y = ops::scale(x, 2.0f);
    backward(ops::sum(y));
  }
  CHECK_FALSE(grad_disabled());
  CHECK(x.grad().empty());
}

TEST_CASE("pairnorm output is centered with unit mean square per segment") {
  Rng rng(37);
  Tensor x = random_leaf(7, 5, rng);
  for (float& v : x.data()) v *= 3.0f;
  std::vector<std::int32_t> offsets{0, 3, 7};
  Tensor y = ops::pairnorm(x, offsets);

  for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
    const int r0 = offsets[s];
    const int r1 = offsets[s + 1];
    double msq = 0.0;
    for (int c = 0; c < 5; ++c) {
      double mean = 0.0;
      for (int r = r0; r < r1; ++r) mean += y.at(r, c);
      CHECK(std::abs(mean / (r1 - r0)) < 1e-5);
    }
    for (int r = r0; r < r1; ++r)
      for (int c = 0; c < 5; ++c) msq += static_cast<double>(y.at(r, c)) * y.at(r, c);
    msq /= static_cast<double>(r1 - r0) * 5;
    CHECK(std::abs(msq - 1.0) < 1e-3);  // eps in tau keeps it slightly below 1
  }
}

TEST_CASE("pairnorm treats segments independently") {
  Rng rng(41);
  Tensor joint = random_leaf(9, 4, rng);
  std::vector<std::int32_t> offsets{0, 4, 9};
  Tensor yj = ops::pairnorm(joint, offsets);

  Tensor top = Tensor::leaf(4, 4, true);
  Tensor bot = Tensor::leaf(5, 4, true);
  std::copy_n(joint.data().begin(), 16, top.data().begin());
  std::copy_n(joint.data().begin() + 16, 20, bot.data().begin());
  std::vector<std::int32_t> otop{0, 4}, obot{0, 5};
  Tensor yt = ops::pairnorm(top, otop);
  Tensor yb = ops::pairnorm(bot, obot);

  for (int i = 0; i < 16; ++i)
    CHECK(yj.data()[static_cast<std::size_t>(i)] == yt.data()[static_cast<std::size_t>(i)]);
  for (int i = 0; i < 20; ++i)
    CHECK(yj.data()[static_cast<std::size_t>(16 + i)] == yb.data()[static_cast<std::size_t>(i)]);
}

TEST_CASE("pairnorm_by_row matches contiguous offsets and rejects bad segments") {
  Rng rng(43);
  Tensor x = random_leaf(6, 3, rng);
  std::vector<std::int32_t> offsets{0, 2, 6};
  std::vector<std::int32_t> seg{0, 0, 1, 1, 1, 1};
  Tensor a = ops::pairnorm(x, offsets);
  Tensor b = ops::pairnorm_by_row(x, seg, 2);
  CHECK(a.data() == b.data());

  std::vector<std::int32_t> bad_gap{0, 0, 2, 2, 2, 2};  // segment 1 empty
  CHECK_THROWS_AS((void)ops::pairnorm_by_row(x, bad_gap, 3), ShapeError);
  std::vector<std::int32_t> short_seg{0, 0, 1};
  CHECK_THROWS_AS((void)ops::pairnorm_by_row(x, short_seg, 2), ShapeError);
  std::vector<std::int32_t> bad_offsets{0, 2, 5};
  CHECK_THROWS_AS((void)ops::pairnorm(x, bad_offsets), ShapeError);
}

TEST_CASE("glorot init stays inside the bound and follows the stream") {
  Tensor w = Tensor::leaf(20, 30, true);
  Rng rng(5);
  glorot_uniform(w, rng);
  const float bound = std::sqrt(6.0f / (20 + 30));
  float lo = 0.0f, hi = 0.0f;
  for (float v : w.data()) {
    CHECK(std::abs(v) <= bound);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(hi > 0.5f * bound);  // the draw actually spreads out
  CHECK(lo < -0.5f * bound);

  Tensor w2 = Tensor::leaf(20, 30, true);
  Rng rng2(5);
  glorot_uniform(w2, rng2);
  CHECK(w.data() == w2.data());
}

TEST_CASE("mlp layers expose named parameters and apply leaky relu between") {
  Rng rng(47);
  std::vector<int> widths{3, 4, 2};
  Mlp mlp(widths, rng);
  CHECK(mlp.in_dim() == 3);
  CHECK(mlp.out_dim() == 2);

  std::vector<Parameter> params;
  mlp.collect("head", params);
  REQUIRE(params.size() == 4);
  CHECK(params[0].name == "head.layer0.weight");
  CHECK(params[1].name == "head.layer0.bias");
  CHECK(params[2].name == "head.layer1.weight");
  CHECK(params[3].name == "head.layer1.bias");
  CHECK(params[0].tensor.rows() == 3);
  CHECK(params[0].tensor.cols() == 4);
  for (float v : params[1].tensor.data()) CHECK(v == 0.0f);

  Tensor x = random_leaf(2, 3, rng, false);
  Tensor y = mlp.forward(x);

  // Double recomputation from the collected parameters.
  for (int r = 0; r < 2; ++r) {
    std::vector<double> h(4, 0.0);
    for (int c = 0; c < 4; ++c) {
      double acc = params[1].tensor.at(0, c);
      for (int k = 0; k < 3; ++k) acc += static_cast<double>(x.at(r, k)) * params[0].tensor.at(k, c);
      h[static_cast<std::size_t>(c)] = acc >= 0.0 ? acc : 0.01 * acc;
    }
    for (int c = 0; c < 2; ++c) {
      double acc = params[3].tensor.at(0, c);
      for (int k = 0; k < 4; ++k) acc += h[static_cast<std::size_t>(k)] * params[2].tensor.at(k, c);
      CHECK(y.at(r, c) == doctest::Approx(acc).epsilon(1e-5));
    }
  }
}

TEST_CASE("backward through mlp, grad_scale and pairnorm matches finite differences") {
  const int rows = 8;
  const float alpha = 0.2f;
  std::vector<std::int32_t> offsets{0, 3, 8};

  auto run = [&](std::vector<int> widths_a, std::vector<int> widths_b, std::uint64_t seed) {
    Rng rng(seed);
    Mlp mlp_a(widths_a, rng);
    Mlp mlp_b(widths_b, rng);
    Tensor x = random_leaf(rows, widths_a.front(), rng);
    MatF ro = random_mat(rows, widths_b.back(), rng);

    std::vector<Parameter> pa, pb;
    mlp_a.collect("a", pa);
    mlp_b.collect("b", pb);

    NetOracle oracle;
    oracle.widths_a = widths_a;
    oracle.widths_b = widths_b;
    oracle.offsets = offsets;
    for (std::size_t l = 0; l + 1 < widths_a.size(); ++l) {
      oracle.wa.push_back(NetOracle::to_double(pa[2 * l].tensor.data()));
      oracle.ba.push_back(NetOracle::to_double(pa[2 * l + 1].tensor.data()));
    }
    for (std::size_t l = 0; l + 1 < widths_b.size(); ++l) {
      oracle.wb.push_back(NetOracle::to_double(pb[2 * l].tensor.data()));
      oracle.bb.push_back(NetOracle::to_double(pb[2 * l + 1].tensor.data()));
    }
    oracle.ro = NetOracle::to_double(ro.v);
    std::vector<double> input = NetOracle::to_double(x.data());

    Tensor h = mlp_a.forward(x);
    Tensor g = ops::grad_scale(h, alpha);
    Tensor p = ops::pairnorm(g, offsets);
    Tensor y = mlp_b.forward(p);
    Tensor loss = readout(y, ro);
    CHECK(rel_err(loss.item(), oracle.loss(input, rows)) < 1e-4);
    backward(loss);

    // Everything upstream of grad_scale carries the extra 1 - alpha.
    const double k = 1.0 - static_cast<double>(alpha);
    for (std::size_t l = 0; l < oracle.wa.size(); ++l) {
      std::vector<double> fd = oracle.fd(oracle.wa[l], input, rows);
      for (double& v : fd) v *= k;
      check_close(pa[2 * l].tensor.grad(), fd, 1e-4, "wa");
      fd = oracle.fd(oracle.ba[l], input, rows);
      for (double& v : fd) v *= k;
      check_close(pa[2 * l + 1].tensor.grad(), fd, 1e-4, "ba");
    }
    for (std::size_t l = 0; l < oracle.wb.size(); ++l) {
      check_close(pb[2 * l].tensor.grad(), oracle.fd(oracle.wb[l], input, rows), 1e-4, "wb");
      check_close(pb[2 * l + 1].tensor.grad(), oracle.fd(oracle.bb[l], input, rows), 1e-4, "bb");
    }
    std::vector<double> fdx = oracle.fd(input, input, rows);
    for (double& v : fdx) v *= k;
    check_close(x.grad(), fdx, 1e-4, "x");
  };

  run({5, 6, 3}, {3, 4, 2}, 51);     // two layers on each side
  run({4, 5, 5, 2}, {2, 3, 2}, 53);  // three-layer first stack
}

TEST_CASE("clause value op matches the analytic batched path") {
  Rng rng(59);
  CnfFormula f = testing::random_formula(rng, 6, 10, 3);
  FactorGraph g = build_factor_graph(f);

  Tensor q = Tensor::leaf(6, 4, true);
  for (float& v : q.data()) v = static_cast<float>(rng.uniform());
  MatF qm = q.to_mat();

  Tensor values = ops::clause_values(g, q);
  MatF want = per_clause_losses(g, qm);
  CHECK(values.to_mat() == want);  // same kernel, bit-for-bit

  backward(ops::sum(values));
  MatF analytic = loss_gradient(g, qm, GradMode::kClauseSum);
  for (std::size_t i = 0; i < analytic.v.size(); ++i) CHECK(q.grad()[i] == analytic.v[i]);
}

TEST_CASE("segment log loss op differentiates like the analytic log gradient") {
  Rng rng(61);
  std::vector<CnfFormula> fs;
  for (int i = 0; i < 3; ++i) fs.push_back(testing::random_formula(rng, 5, 8, 3));
  std::vector<std::int64_t> ids{0, 1, 2};
  Batch batch = make_batch(fs, ids);

  const int n = batch.graph.n;
  Tensor q = Tensor::leaf(n, 3, true);
  for (float& v : q.data()) v = static_cast<float>(0.05 + 0.9 * rng.uniform());
  MatF qm = q.to_mat();

  Tensor values = ops::clause_values(batch.graph, q);
  Tensor col = ops::segment_log_loss(values, batch.clause_offsets);
  CHECK(col.rows() == 3);
  MatF want = qsat::segment_log_loss(per_clause_losses(batch.graph, qm), batch.clause_offsets);
  for (std::size_t i = 0; i < want.v.size(); ++i)
    CHECK(rel_err(col.data()[i], want.v[i]) < 1e-5);

  backward(ops::sum(col));
  MatF vals = per_clause_losses(batch.graph, qm);
  MatF analytic = loss_gradient(batch.graph, qm, GradMode::kLog, &vals);
  for (std::size_t i = 0; i < analytic.v.size(); ++i)
    CHECK(std::abs(q.grad()[i] - analytic.v[i]) < 1e-4);
}

TEST_CASE("multi assignment op matches finite differences of the scalar rule") {
  Rng rng(67);
  const int count = 4, u = 5;
  Tensor col = Tensor::leaf(count, u, true);
  for (float& v : col.data()) v = static_cast<float>(0.5 + 4.0 * rng.uniform());
  std::vector<std::uint8_t> mask{0, 1, 0, 0};  // row 1 contributes nothing

  Tensor loss = ops::multi_assignment_loss(col, mask);
  double want = 0.0;
  for (int b = 0; b < count; ++b) {
    if (mask[static_cast<std::size_t>(b)]) continue;
    std::vector<double> row(u);
    for (int j = 0; j < u; ++j) row[static_cast<std::size_t>(j)] = col.at(b, j);
    want += multi_assignment_loss(row).loss;
  }
  CHECK(rel_err(loss.item(), want) < 1e-5);

  backward(loss);
  for (int b = 0; b < count; ++b) {
    for (int j = 0; j < u; ++j) {
      std::vector<double> row(u);
      for (int k = 0; k < u; ++k) row[static_cast<std::size_t>(k)] = col.at(b, k);
      double fd = 0.0;
      if (!mask[static_cast<std::size_t>(b)]) {
        const double h = 1e-5;
        std::vector<double> up = row, dn = row;
        up[static_cast<std::size_t>(j)] += h;
        dn[static_cast<std::size_t>(j)] -= h;
        fd = (multi_assignment_loss(up).loss - multi_assignment_loss(dn).loss) / (2.0 * h);
      }
      CHECK(std::abs(col.grad()[static_cast<std::size_t>(b) * u + j] - fd) < 1e-4);
    }
  }
}
