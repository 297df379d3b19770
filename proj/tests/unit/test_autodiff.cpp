#include <doctest.h>

#include <cmath>
#include <numeric>

#include "aceg/autodiff/blocks.hpp"
#include "aceg/autodiff/checkpoint.hpp"
#include "aceg/autodiff/gradcheck.hpp"
#include "aceg/autodiff/graph.hpp"
#include "aceg/autodiff/optim.hpp"
#include "aceg/common/random.hpp"

using namespace aceg;
using namespace aceg::ad;
using Mat = Matrix<double>;

namespace {

Mat rows(std::initializer_list<std::initializer_list<double>> r) {
  Mat m(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(r.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : r) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

Mat randn(Rng& rng, Eigen::Index r, Eigen::Index c, double s = 1.0) {
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng, 0.0, s);
  return m;
}

Mat eval1(const std::function<Var(Graph<double>&)>& f) {
  Graph<double> g;
  return g.value(f(g));
}

}  // namespace

TEST_CASE("linear: identity and summing row") {
  auto out = eval1([](Graph<double>& g) {
    return g.linear(g.constant(rows({{3, 4}})), g.constant(Mat::Identity(2, 2)), g.constant(Mat::Zero(1, 2)));
  });
  CHECK(out(0, 0) == 3.0);
  CHECK(out(0, 1) == 4.0);
  out = eval1([](Graph<double>& g) {
    return g.linear(g.constant(rows({{2, 3}})), g.constant(rows({{1, 1}})), g.constant(rows({{1}})));
  });
  CHECK(out(0, 0) == 6.0);
}

TEST_CASE("linear: random 4x3 against a triple loop") {
  Rng rng(11);
  const Mat x = randn(rng, 5, 3), W = randn(rng, 4, 3), b = randn(rng, 1, 4);
  const auto out = eval1([&](Graph<double>& g) { return g.linear(g.constant(x), g.constant(W), g.constant(b)); });
  for (int n = 0; n < 5; ++n) {
    for (int o = 0; o < 4; ++o) {
      double acc = b(0, o);
      for (int i = 0; i < 3; ++i) acc += W(o, i) * x(n, i);
      CHECK(out(n, o) == doctest::Approx(acc).epsilon(1e-14));
    }
  }
}

TEST_CASE("softmax: worked values") {
  auto s = eval1([](Graph<double>& g) { return g.softmax(g.constant(rows({{0, 0}}))); });
  CHECK(s(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  s = eval1([](Graph<double>& g) { return g.softmax(g.constant(rows({{1000, 1000, 1000}}))); });
  CHECK(s.allFinite());
  for (int j = 0; j < 3; ++j) CHECK(std::abs(s(0, j) - 1.0 / 3.0) < 1e-15);
  s = eval1([](Graph<double>& g) {
    return g.softmax(g.constant(rows({{std::log(1.0), std::log(2.0), std::log(3.0)}})));
  });
  for (int j = 0; j < 3; ++j) CHECK(std::abs(s(0, j) - (j + 1) / 6.0) < 1e-15);
}

TEST_CASE("softmax: sums to one and is shift invariant") {
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    const Mat v = randn(rng, 3, 7, 20.0);
    const double c = normal(rng, 0.0, 100.0);
    const auto a = eval1([&](Graph<double>& g) { return g.softmax(g.constant(v)); });
    const auto b = eval1([&](Graph<double>& g) { return g.softmax(g.constant((v.array() + c).matrix())); });
    for (int r = 0; r < 3; ++r) CHECK(std::abs(a.row(r).sum() - 1.0) < 1e-12);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("layer_norm: worked values and direct formula") {
  const Mat one = Mat::Ones(1, 2), zero = Mat::Zero(1, 2);
  auto y = eval1([&](Graph<double>& g) {
    return g.layer_norm(g.constant(rows({{1, -1}})), g.constant(one), g.constant(zero));
  });
  CHECK(y(0, 0) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(y(0, 1) == doctest::Approx(-1.0).epsilon(1e-5));
  y = eval1([&](Graph<double>& g) { return g.layer_norm(g.constant(rows({{5, 5}})), g.constant(one), g.constant(zero)); });
  CHECK(y(0, 0) == 0.0);
  CHECK(y(0, 1) == 0.0);

  Rng rng(5);
  const Mat x = randn(rng, 1, 8, 3.0), gain = randn(rng, 1, 8), bias = randn(rng, 1, 8);
  y = eval1([&](Graph<double>& g) { return g.layer_norm(g.constant(x), g.constant(gain), g.constant(bias)); });
  double mu = 0.0, var = 0.0;
  for (int j = 0; j < 8; ++j) mu += x(0, j) / 8.0;
  for (int j = 0; j < 8; ++j) var += (x(0, j) - mu) * (x(0, j) - mu) / 8.0;
  for (int j = 0; j < 8; ++j) {
    CHECK(y(0, j) == doctest::Approx((x(0, j) - mu) / std::sqrt(var + 1e-5) * gain(0, j) + bias(0, j)).epsilon(1e-12));
  }
}

namespace {

struct BlockFixture {
  CrossAttentionConfig cfg;
  ParameterSet<double> params;
  BlockFixture() {
    cfg.model_dim = 8;
    cfg.kv_dim = 6;
    cfg.heads = 2;
    cfg.ffn_mult = 4;
    add_cross_attention_params(params, "b.", cfg);
    Rng rng(17);
    for (auto& p : params) {
      for (Eigen::Index i = 0; i < p.value().size(); ++i) p.value().data()[i] += normal(rng, 0.0, 0.3);
    }
  }
  Mat run(const Mat& x, const Mat& kv) {
    Graph<double> g;
    const auto vars = bind_cross_attention(g, params, "b.", false);
    return g.value(cross_attention(g, g.constant(x), g.constant(kv), vars, cfg.heads));
  }
};

double rel_diff(const Mat& a, const Mat& b) { return (a - b).norm() / std::max(a.norm(), 1e-300); }

}  // namespace

TEST_CASE("cross_attention: single key gets weight one") {
  BlockFixture f;
  Rng rng(2);
  const Mat q = randn(rng, 3, 8), k = randn(rng, 4, 8), v = randn(rng, 1, 8);
  // attention itself: one key means the output row is exactly that value
  const auto a = eval1([&](Graph<double>& g) {
    return g.attention(g.constant(q), g.constant(k.topRows(1)), g.constant(v), 2);
  });
  for (int r = 0; r < 3; ++r) CHECK((a.row(r) - v.row(0)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("cross_attention: invariant to kv permutation and duplication") {
  BlockFixture f;
  Rng rng(23);
  for (int t = 0; t < 20; ++t) {
    const Mat x = randn(rng, 3, 8), kv = randn(rng, 5, 6);
    const Mat base = f.run(x, kv);
    std::vector<int> perm(5);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Mat kvp(5, 6);
    for (int i = 0; i < 5; ++i) kvp.row(i) = kv.row(perm[i]);
    CHECK(rel_diff(base, f.run(x, kvp)) < 1e-10);
    Mat kvd(10, 6);
    kvd << kv, kv;
    CHECK(rel_diff(base, f.run(x, kvd)) < 1e-10);
  }
}

TEST_CASE("backward: x^2, constants and finite differences") {
  Graph<double> g;
  const auto x = g.variable(rows({{3}}));
  g.backward(g.sum(g.mul(x, x)));
  CHECK(g.grad(x)(0, 0) == 6.0);

  Graph<double> h;
  const auto y = h.variable(rows({{1, 2}}));
  const auto c = h.constant(rows({{4}}));
  h.backward(h.add(c, h.scale(h.sum(y), 0.0)));
  CHECK(h.grad(y).cwiseAbs().maxCoeff() == 0.0);

  GradCheckOptions opts;
  opts.configs = 20;
  for (const auto& r : run_op_gradchecks(opts)) {
    INFO(r.name);
    CHECK(r.configs >= 20);
    CHECK(r.max_rel_error < 1e-4);
  }
}

TEST_CASE("trimmed_mean keeps the lowest fraction") {
  Mat v(10, 1);
  for (int i = 0; i < 10; ++i) v(i, 0) = 10 - i;  // 10..1
  const auto m = eval1([&](Graph<double>& g) { return g.trimmed_mean(g.constant(v), 0.3); });
  CHECK(m(0, 0) == doctest::Approx(2.0));
  CHECK(trim_count(10, 0.3) == 3);
  const double vals[] = {5, 1, 4, 1, 3};
  const auto k = smallest_k_indices(vals, 3);
  CHECK(k == std::vector<std::int64_t>{1, 3, 4});
}

TEST_CASE("no op overflows on bounded finite inputs") {
  Rng rng(31);
  const Mat x = randn(rng, 4, 6, 1e3).cwiseMax(-1e3).cwiseMin(1e3);
  const auto out = eval1([&](Graph<double>& g) {
    const auto v = g.constant(x);
    const auto ln = g.layer_norm(v, g.constant(Mat::Ones(1, 6)), g.constant(Mat::Zero(1, 6)));
    return g.add(g.add(g.softmax(v), g.gelu(v)), g.add(ln, g.attention(v, v, v, 2)));
  });
  CHECK(out.allFinite());
}

TEST_CASE("adamw: first step, zero gradient, scalar oracle") {
  AdamWConfig cfg{0.9, 0.999, 1e-12, 0.0};
  Mat p = rows({{1.0}});
  AdamWState<double> st;
  adamw_step(p, rows({{1.0}}), st, cfg, 0.1);
  CHECK(p(0, 0) == doctest::Approx(0.9).epsilon(1e-9));

  Mat q = rows({{2.0, -3.0}});
  AdamWState<double> s2;
  for (int i = 0; i < 3; ++i) adamw_step(q, Mat(Mat::Zero(1, 2)), s2, cfg, 0.1);
  CHECK(q(0, 0) == 2.0);
  CHECK(q(0, 1) == -3.0);

  // scalar reference, two steps with constant gradient and decay
  const AdamWConfig c{0.9, 0.999, 1e-8, 0.01};
  const double g = 0.3, lr = 0.05;
  double w = 0.7, m = 0.0, v = 0.0;
  for (int t = 1; t <= 2; ++t) {
    w -= lr * c.weight_decay * w;
    m = c.beta1 * m + (1 - c.beta1) * g;
    v = c.beta2 * v + (1 - c.beta2) * g * g;
    const double mh = m / (1 - std::pow(c.beta1, t)), vh = v / (1 - std::pow(c.beta2, t));
    w -= lr * mh / (std::sqrt(vh) + c.eps);
  }
  Mat r = rows({{0.7}});
  AdamWState<double> s3;
  for (int t = 0; t < 2; ++t) adamw_step(r, rows({{g}}), s3, c, lr);
  CHECK(r(0, 0) == doctest::Approx(w).epsilon(1e-12));
}

TEST_CASE("one_cycle_lr shape") {
  CHECK(one_cycle_lr(0, 1000, 0.02) == doctest::Approx(0.002));
  CHECK(one_cycle_lr(100, 1000, 0.02) == doctest::Approx(0.02));
  CHECK(one_cycle_lr(999, 1000, 0.02) == doctest::Approx(0.0002).epsilon(0.01));
  CHECK_THROWS(one_cycle_lr(1000, 1000, 0.02));
}

TEST_CASE("checkpoint round-trips bit-exactly") {
  std::vector<NamedTensor> ts(2);
  ts[0].name = "a";
  ts[0].tensor = Tensor<float>::zeros({3, 2});
  ts[0].tensor.values << 1.5f, -0.0f, 3e-38f, 1e38f, 7.25f, -2.f;
  ts[1].name = "bias";
  ts[1].tensor = Tensor<float>::zeros({4});
  ts[1].tensor.values << 1.f, 2.f, 3.f, 4.f;
  const auto bytes = encode_tensors(ts);
  CHECK(std::string(bytes.begin(), bytes.begin() + 8) == "ACEGPRM1");
  const auto back = decode_tensors(bytes);
  REQUIRE(back.size() == 2);
  CHECK(back[1].tensor.shape == ts[1].tensor.shape);
  CHECK(encode_tensors(back) == bytes);
  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_tensors(bad), FormatError);
  CHECK_THROWS_AS(decode_tensors(std::span(bytes).first(bytes.size() - 3)), FormatError);
}
