#include "aceg/autodiff/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "aceg/autodiff/blocks.hpp"
#include "aceg/common/random.hpp"

namespace aceg::ad {

namespace {

using Mat = Matrix<double>;

Mat random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double stddev = 1.0) {
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng, 0.0, stddev);
  return m;
}

std::vector<Eigen::Index> probe_indices(Eigen::Index size, int max_entries) {
  std::vector<Eigen::Index> idx;
  if (size <= max_entries) {
    for (Eigen::Index i = 0; i < size; ++i) idx.push_back(i);
    return idx;
  }
  const double stride = static_cast<double>(size) / max_entries;
  for (int i = 0; i < max_entries; ++i) idx.push_back(static_cast<Eigen::Index>(i * stride));
  return idx;
}

// sum(op(...) * weights) with fixed random weights so the upstream gradient
// is not uniform.
Var weighted_sum(Graph<double>& g, Var out, const Mat& weights) {
  return g.sum(g.mul(out, g.constant(weights)));
}

}  // namespace

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

double finite_difference_error(const std::function<double()>& loss, std::span<Matrix<double>* const> values,
                               std::span<const Matrix<double>> analytic, const GradCheckOptions& opts) {
  double worst = 0.0;
  for (std::size_t t = 0; t < values.size(); ++t) {
    auto& v = *values[t];
    for (auto i : probe_indices(v.size(), opts.max_entries)) {
      const double orig = v.data()[i];
      // fourth-order central stencil
      auto at = [&](double dx) {
        v.data()[i] = orig + dx;
        return loss();
      };
      const double h = opts.step;
      const double numeric = (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h);
      v.data()[i] = orig;
      worst = std::max(worst, relative_error(analytic[t].data()[i], numeric, opts.floor));
    }
  }
  return worst;
}

double check_graph_gradients(const std::function<Var(Graph<double>&, std::span<const Var>)>& build,
                             std::vector<Matrix<double>> inputs, const GradCheckOptions& opts) {
  std::vector<Mat> analytic;
  {
    Graph<double> g;
    std::vector<Var> vars;
    for (const auto& m : inputs) vars.push_back(g.variable(m));
    const Var loss = build(g, vars);
    g.backward(loss);
    for (auto v : vars) {
      const auto& gr = g.grad(v);
      analytic.push_back(gr.size() == 0 ? Mat::Zero(g.value(v).rows(), g.value(v).cols()) : gr);
    }
  }
  auto eval = [&]() {
    Graph<double> g;
    std::vector<Var> vars;
    for (const auto& m : inputs) vars.push_back(g.constant(m));
    return g.value(build(g, vars))(0, 0);
  };
  std::vector<Mat*> ptrs;
  for (auto& m : inputs) ptrs.push_back(&m);
  return finite_difference_error(eval, ptrs, analytic, opts);
}

std::vector<GradCheckResult> run_op_gradchecks(const GradCheckOptions& opts) {
  std::vector<GradCheckResult> results;
  Rng rng(derive_seed(opts.seed, {0x6772616463ULL}));

  auto run = [&](const std::string& name, auto&& one_config) {
    GradCheckResult r;
    r.name = name;
    for (int c = 0; c < opts.configs; ++c) {
      r.max_rel_error = std::max(r.max_rel_error, one_config());
      ++r.configs;
    }
    r.passed = r.max_rel_error < opts.tolerance;
    results.push_back(r);
  };

  run("linear", [&] {
    const auto n = uniform_int(rng, 1, 5), in = uniform_int(rng, 1, 6), out = uniform_int(rng, 1, 6);
    Mat w = random_matrix(rng, n, out);
    return check_graph_gradients(
        [&](Graph<double>& g, std::span<const Var> v) { return weighted_sum(g, g.linear(v[0], v[1], v[2]), w); },
        {random_matrix(rng, n, in), random_matrix(rng, out, in), random_matrix(rng, 1, out)}, opts);
  });

  run("matmul", [&] {
    const auto n = uniform_int(rng, 1, 5), k = uniform_int(rng, 1, 5), m = uniform_int(rng, 1, 5);
    Mat w = random_matrix(rng, n, m);
    return check_graph_gradients(
        [&](Graph<double>& g, std::span<const Var> v) { return weighted_sum(g, g.matmul(v[0], v[1]), w); },
        {random_matrix(rng, n, k), random_matrix(rng, k, m)}, opts);
  });

  run("add_mul_scale", [&] {
    const auto n = uniform_int(rng, 1, 4), m = uniform_int(rng, 1, 4);
    const double s = normal(rng);
    Mat w = random_matrix(rng, n, m);
    return check_graph_gradients(
        [&](Graph<double>& g, std::span<const Var> v) {
          return weighted_sum(g, g.scale(g.mul(g.add(v[0], v[1]), v[1]), s), w);
        },
        {random_matrix(rng, n, m), random_matrix(rng, n, m)}, opts);
  });

  run("layer_norm", [&] {
    const auto n = uniform_int(rng, 1, 4), d = uniform_int(rng, 2, 8);
    Mat w = random_matrix(rng, n, d);
    return check_graph_gradients(
        [&](Graph<double>& g, std::span<const Var> v) { return weighted_sum(g, g.layer_norm(v[0], v[1], v[2]), w); },
        {random_matrix(rng, n, d, 2.0), random_matrix(rng, 1, d), random_matrix(rng, 1, d)}, opts);
  });

  run("gelu", [&] {
    const auto n = uniform_int(rng, 1, 4), d = uniform_int(rng, 1, 6);
    Mat w = random_matrix(rng, n, d);
    return check_graph_gradients(
        [&](Graph<double>& g, std::span<const Var> v) { return weighted_sum(g, g.gelu(v[0]), w); },
        {random_matrix(rng, n, d, 2.0)}, opts);
  });

  run("softmax", [&] {
    const auto n = uniform_int(rng, 1, 4), d = uniform_int(rng, 1, 7);
    Mat w = random_matrix(rng, n, d);
    return check_graph_gradients(
        [&](Graph<double>& g, std::span<const Var> v) { return weighted_sum(g, g.softmax(v[0]), w); },
        {random_matrix(rng, n, d, 2.0)}, opts);
  });

  run("attention", [&] {
    const int heads = static_cast<int>(uniform_int(rng, 1, 3));
    const auto d = heads * uniform_int(rng, 1, 3), n = uniform_int(rng, 1, 4), m = uniform_int(rng, 1, 5);
    Mat w = random_matrix(rng, n, d);
    return check_graph_gradients(
        [&](Graph<double>& g, std::span<const Var> v) { return weighted_sum(g, g.attention(v[0], v[1], v[2], heads), w); },
        {random_matrix(rng, n, d), random_matrix(rng, m, d), random_matrix(rng, m, d)}, opts);
  });

  run("reductions", [&] {
    const auto n = uniform_int(rng, 1, 4), d = uniform_int(rng, 1, 4);
    Mat w = random_matrix(rng, n, d);
    return check_graph_gradients(
        [&](Graph<double>& g, std::span<const Var> v) {
          return g.add(g.sum(g.mul(v[0], g.constant(w))), g.mean(g.mul(v[0], v[0])));
        },
        {random_matrix(rng, n, d)}, opts);
  });

  run("concat_rows", [&] {
    const auto d = uniform_int(rng, 1, 4), a = uniform_int(rng, 1, 3), b = uniform_int(rng, 1, 3);
    Mat w = random_matrix(rng, a + b, d);
    return check_graph_gradients(
        [&](Graph<double>& g, std::span<const Var> v) {
          const Var parts[] = {v[0], v[1]};
          return weighted_sum(g, g.concat_rows(parts), w);
        },
        {random_matrix(rng, a, d), random_matrix(rng, b, d)}, opts);
  });

  run("trimmed_mean", [&] {
    const auto n = uniform_int(rng, 2, 12);
    const double frac = uniform(rng, 0.2, 1.0);
    Mat w = random_matrix(rng, n, 1);
    return check_graph_gradients(
        [&](Graph<double>& g, std::span<const Var> v) {
          return g.trimmed_mean(g.mul(v[0], g.constant(w)), frac);
        },
        {random_matrix(rng, n, 1)}, opts);
  });

  run("softmax_cross_entropy", [&] {
    // -sum(onehot * log softmax) written with engine ops on probabilities
    const auto d = uniform_int(rng, 2, 6);
    Mat w = random_matrix(rng, 1, d);
    return check_graph_gradients(
        [&](Graph<double>& g, std::span<const Var> v) {
          const Var p = g.softmax(v[0]);
          return g.sum(g.mul(g.mul(p, p), g.constant(w)));
        },
        {random_matrix(rng, 1, d, 2.0)}, opts);
  });

  run("cross_attention_block", [&] {
    CrossAttentionConfig cfg;
    cfg.heads = static_cast<int>(uniform_int(rng, 1, 2));
    cfg.model_dim = cfg.heads * static_cast<int>(uniform_int(rng, 2, 3));
    cfg.kv_dim = static_cast<int>(uniform_int(rng, 2, 5));
    cfg.ffn_mult = 2;
    const auto n = uniform_int(rng, 1, 3), m = uniform_int(rng, 1, 4);
    ParameterSet<double> params;
    add_cross_attention_params(params, "b.", cfg);
    for (auto& p : params) {
      for (Eigen::Index i = 0; i < p.value().size(); ++i) p.value().data()[i] += normal(rng, 0.0, 0.5);
    }
    Mat x = random_matrix(rng, n, cfg.model_dim);
    Mat kv = random_matrix(rng, m, cfg.kv_dim);
    Mat w = random_matrix(rng, n, cfg.model_dim);
    auto loss_of = [&](bool grads) {
      Graph<double> g;
      const Var xv = grads ? g.variable(x) : g.constant(x);
      const Var kvv = grads ? g.variable(kv) : g.constant(kv);
      const auto vars = bind_cross_attention(g, params, "b.", grads);
      const Var loss = weighted_sum(g, cross_attention(g, xv, kvv, vars, cfg.heads), w);
      if (grads) {
        params.zero_grad();
        g.backward(loss);
        return std::make_pair(g.value(loss)(0, 0), std::vector<Mat>{g.grad(xv), g.grad(kvv)});
      }
      return std::make_pair(g.value(loss)(0, 0), std::vector<Mat>{});
    };
    auto [l0, input_grads] = loss_of(true);
    std::vector<Mat*> ptrs{&x, &kv};
    std::vector<Mat> analytic = input_grads;
    for (auto& p : params) {
      ptrs.push_back(&p.value());
      analytic.push_back(p.grad);
    }
    return finite_difference_error([&] { return loss_of(false).first; }, ptrs, analytic, opts);
  });

  return results;
}

}  // namespace aceg::ad
