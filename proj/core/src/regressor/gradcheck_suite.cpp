#include "aceg/regressor/gradcheck_suite.hpp"

#include <algorithm>

#include "aceg/common/random.hpp"
#include "aceg/regressor/losses.hpp"

namespace aceg::reg {

namespace {

using Mat = ad::Matrix<double>;

Mat random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double stddev = 1.0) {
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng, 0.0, stddev);
  return m;
}

geo::PoseSE3 random_pose(Rng& rng) {
  geo::PoseSE3 T;
  T.R = geo::so3_exp(geo::Vec3(normal(rng), normal(rng), normal(rng)));
  T.t = geo::Vec3(normal(rng), normal(rng), normal(rng));
  return T;
}

}  // namespace

std::vector<ad::GradCheckResult> run_regressor_gradchecks(const ad::GradCheckOptions& opts) {
  std::vector<ad::GradCheckResult> results;
  Rng rng = make_rng(opts.seed, {0x7265677265ULL});

  auto run = [&](const std::string& name, auto&& one_config) {
    ad::GradCheckResult r;
    r.name = name;
    for (int c = 0; c < opts.configs; ++c) {
      r.max_rel_error = std::max(r.max_rel_error, one_config());
      ++r.configs;
    }
    r.passed = r.max_rel_error < opts.tolerance;
    results.push_back(r);
  };

  run("laplace_nll_3d_rows", [&] {
    const auto n = uniform_int(rng, 1, 6);
    Mat out = random_matrix(rng, n, 4);
    const Mat targets = random_matrix(rng, n, 3);
    return ad::check_graph_gradients(
        [&](ad::Graph<double>& g, std::span<const ad::Var> v) { return g.sum(laplace_nll_3d_rows(g, v[0], targets)); },
        {out}, opts);
  });

  run("reprojection_nll_rows", [&] {
    const auto n = uniform_int(rng, 2, 6);
    std::vector<ReprojRecord> recs(static_cast<std::size_t>(n));
    Mat out(n, 4);
    for (Eigen::Index r = 0; r < n; ++r) {
      auto& rec = recs[static_cast<std::size_t>(r)];
      rec.K = {uniform(rng, 50, 150), uniform(rng, 50, 150), uniform(rng, 40, 80), uniform(rng, 40, 80)};
      rec.T_wc = random_pose(rng);
      // odd rows sit behind the camera and exercise the depth-prior branch
      const double z = (r % 2 == 0) ? uniform(rng, 1.0, 4.0) : -uniform(rng, 1.0, 4.0);
      const geo::Vec3 yc(normal(rng, 0.0, 0.5), normal(rng, 0.0, 0.5), z);
      const geo::Vec3 y = rec.T_wc.to_world(yc);
      rec.pixel = {uniform(rng, 0, 128), uniform(rng, 0, 128)};
      rec.depth_target = y + geo::Vec3(normal(rng), normal(rng), normal(rng));
      out.row(r) << y.x(), y.y(), y.z(), normal(rng, 0.0, 0.5);
    }
    return ad::check_graph_gradients(
        [&](ad::Graph<double>& g, std::span<const ad::Var> v) { return g.sum(reprojection_nll_rows(g, v[0], recs)); },
        {out}, opts);
  });

  run("depth_prior_loss", [&] {
    const geo::PoseSE3 T = random_pose(rng);
    const geo::Vec3 ray = geo::Vec3(normal(rng, 0, 0.3), normal(rng, 0, 0.3), 1.0).normalized();
    const double d0 = uniform(rng, 0.5, 5.0);
    const geo::Vec3 target = depth_prior_target(ray, T, d0);
    Mat out = random_matrix(rng, 1, 4);
    Mat tgt(1, 3);
    tgt << target.x(), target.y(), target.z();
    return ad::check_graph_gradients(
        [&](ad::Graph<double>& g, std::span<const ad::Var> v) { return g.sum(laplace_nll_3d_rows(g, v[0], tgt)); },
        {out}, opts);
  });

  run("laplace_nll_3d_o_regress", [&] {
    RegressorConfig cfg;
    cfg.feat_dim = static_cast<int>(uniform_int(rng, 2, 5));
    cfg.heads = static_cast<int>(uniform_int(rng, 1, 2));
    cfg.model_dim = cfg.heads * static_cast<int>(uniform_int(rng, 2, 3));
    cfg.blocks = static_cast<int>(uniform_int(rng, 1, 2));
    cfg.ffn_mult = 2;
    cfg.head_hidden = static_cast<int>(uniform_int(rng, 2, 5));
    cfg.code_tokens = static_cast<int>(uniform_int(rng, 1, 5));
    cfg.code_dim = static_cast<int>(uniform_int(rng, 2, 4));
    auto model = Regressor<double>::init(cfg, static_cast<std::uint64_t>(uniform_int(rng, 0, 1 << 30)));
    for (auto& p : model.params()) {
      for (Eigen::Index i = 0; i < p.value().size(); ++i) p.value().data()[i] += normal(rng, 0.0, 0.2);
    }
    const auto n = uniform_int(rng, 1, 4);
    const Mat E = random_matrix(rng, n, cfg.feat_dim);
    Mat code = random_matrix(rng, cfg.code_tokens, cfg.code_dim);
    const Mat targets = random_matrix(rng, n, 3);

    auto loss = [&](bool grads, Mat* code_grad) {
      ad::Graph<double> g;
      const auto e = g.constant(E);
      const auto c = grads ? g.variable(code) : g.constant(code);
      const auto l = g.mean(laplace_nll_3d_rows(g, model.forward(g, e, c, grads), targets));
      if (grads) {
        model.params().zero_grad();
        g.backward(l);
        *code_grad = g.grad(c);
      }
      return g.value(l)(0, 0);
    };
    Mat code_grad;
    loss(true, &code_grad);
    std::vector<Mat*> values{&code};
    std::vector<Mat> analytic{code_grad};
    for (auto& p : model.params()) {
      values.push_back(&p.value());
      analytic.push_back(p.grad);
    }
    return ad::finite_difference_error([&] { return loss(false, nullptr); }, values, analytic, opts);
  });

  return results;
}

}  // namespace aceg::reg
