#include <doctest.h>

#include <cmath>
#include <numeric>

#include "aceg/common/error.hpp"
#include "aceg/common/random.hpp"
#include "aceg/regressor/gradcheck_suite.hpp"
#include "aceg/regressor/losses.hpp"
#include "aceg/regressor/map_code.hpp"
#include "aceg/regressor/model.hpp"

using namespace aceg;
using namespace aceg::reg;

namespace {

RegressorConfig small_cfg() {
  RegressorConfig c;
  c.feat_dim = 8;
  c.model_dim = 16;
  c.blocks = 2;
  c.heads = 2;
  c.head_hidden = 16;
  c.code_tokens = 12;
  c.code_dim = 10;
  return c;
}

ad::Matrix<double> randn(Rng& rng, Eigen::Index r, Eigen::Index c, double s = 1.0) {
  ad::Matrix<double> m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng, 0.0, s);
  return m;
}

double rel(const Eigen::Vector3d& a, const Eigen::Vector3d& b) { return (a - b).norm() / std::max(a.norm(), 1e-300); }

// Golden-section minimizer over [lo, hi].
double golden_min(const std::function<double(double)>& f, double lo, double hi) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  for (int i = 0; i < 300 && b - a > 1e-14 * (1.0 + std::abs(a)); ++i) {
    const double c = b - phi * (b - a), d = a + phi * (b - a);
    (f(c) < f(d) ? b : a) = (f(c) < f(d) ? d : c);
  }
  return 0.5 * (a + b);
}

}  // namespace

TEST_CASE("init_map_code: spread, determinism and the 12 MB payload") {
  const auto a = init_map_code(128, 96, 9, "s");
  const double mean = a.tokens.cast<double>().mean();
  const double sd = std::sqrt((a.tokens.cast<double>().array() - mean).square().mean());
  CHECK(sd >= 0.008);
  CHECK(sd <= 0.012);
  CHECK(encode_map_code(a) == encode_map_code(init_map_code(128, 96, 9, "s")));
  CHECK(map_code_payload_bytes(4096, 768) == 12'582'912ULL);
}

TEST_CASE("map code format round-trips and rejects damage") {
  auto c = init_map_code(5, 3, 1, "scene-x");
  c.iteration = 77;
  c.scale = 0.5;
  const auto bytes = encode_map_code(c);
  const auto back = decode_map_code(bytes);
  CHECK(back.scene_id == "scene-x");
  CHECK(back.iteration == 77);
  CHECK(encode_map_code(back) == bytes);
  auto bad = bytes;
  bad[3] ^= 1;
  CHECK_THROWS_AS(decode_map_code(bad), FormatError);
  CHECK_THROWS_AS(decode_map_code(std::span(bytes).first(bytes.size() - 4)), LengthMismatchError);
}

TEST_CASE("regress: token permutation and duplication invariance") {
  Rng rng(2);
  auto model = Regressor<double>::init(small_cfg(), 5);
  for (int t = 0; t < 20; ++t) {
    const auto code = randn(rng, 12, 10, 0.5);
    const Eigen::VectorXd e = randn(rng, 8, 1);
    const auto base = model.regress(e, code);
    std::vector<int> perm(12);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    ad::Matrix<double> p(12, 10), dup(24, 10);
    for (int i = 0; i < 12; ++i) p.row(i) = code.row(perm[i]);
    dup << code, code;
    CHECK(rel(model.regress(e, p).y, base.y) < 1e-10);
    CHECK(rel(model.regress(e, dup).y, base.y) < 1e-9);
  }
}

TEST_CASE("regress: sigma clamp and batch equals loop") {
  Rng rng(3);
  auto model = Regressor<double>::init(small_cfg(), 6);
  const auto code = randn(rng, 12, 10);
  const auto E = randn(rng, 8, 8, 3.0);
  const auto batch = model.regress_batch(E, code);
  REQUIRE(batch.size() == 8);
  for (int i = 0; i < 8; ++i) {
    const auto one = model.regress(E.row(i).transpose(), code);
    CHECK((one.y - batch[static_cast<std::size_t>(i)].y).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(one.sigma - batch[static_cast<std::size_t>(i)].sigma) < 1e-12);
    CHECK(batch[static_cast<std::size_t>(i)].sigma >= std::exp(-kLogSigmaBound));
    CHECK(batch[static_cast<std::size_t>(i)].sigma <= std::exp(kLogSigmaBound));
  }
  Eigen::Vector4d raw(0, 0, 0, 50.0);
  CHECK(decode_output(raw).sigma == doctest::Approx(std::exp(6.0)));
}

TEST_CASE("laplace NLL identities in 3D and 2D") {
  CHECK(laplace_nll_3d({Eigen::Vector3d(1, 2, 3), 1.0}, Eigen::Vector3d(1, 2, 3)) == 0.0);
  CHECK(std::abs(laplace_nll_3d({Eigen::Vector3d(1, 0, 0), 1.0}, Eigen::Vector3d::Zero()) - std::sqrt(2.0)) < 1e-12);
  CHECK(laplace_nll_2d(Eigen::Vector2d(4, 5), 1.0, Eigen::Vector2d(4, 5)) == 0.0);
  CHECK(std::abs(laplace_nll_2d(Eigen::Vector2d(0, 1), 1.0, Eigen::Vector2d::Zero()) - std::sqrt(2.0)) < 1e-12);
  for (double r : {0.1, 1.0, 10.0}) {
    const double s3 = golden_min([&](double s) { return laplace_nll_3d({Eigen::Vector3d(r, 0, 0), s}, Eigen::Vector3d::Zero()); },
                                 1e-3, 100.0);
    const double s2 = golden_min([&](double s) { return laplace_nll_2d(Eigen::Vector2d(0, r), s, Eigen::Vector2d::Zero()); },
                                 1e-3, 100.0);
    CHECK(std::abs(s3 - std::sqrt(2.0) * r) < 1e-6);
    CHECK(std::abs(s2 - std::sqrt(2.0) * r) < 1e-6);
  }
}

TEST_CASE("project_prediction: sigma propagation, behind camera, z clamp") {
  const geo::Intrinsics K{100, 100, 50, 50};
  const geo::PoseSE3 I{geo::Mat3::Identity(), geo::Vec3::Zero()};
  auto p = project_prediction({Eigen::Vector3d(0, 0, 2), 0.02}, K, I, Eigen::Vector2d(50, 50));
  CHECK(p.valid);
  CHECK(p.sigma_x == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(project_prediction({Eigen::Vector3d(0, 0, -1), 0.02}, K, I, Eigen::Vector2d(50, 50)).valid);
  p = project_prediction({Eigen::Vector3d(0, 0, geo::kZMin / 2), 0.02}, K, I, Eigen::Vector2d(50, 50));
  CHECK(p.sigma_x == doctest::Approx(0.02 * 100 / geo::kZMin));
  CHECK_FALSE(project_prediction({Eigen::Vector3d(20, 0, 1), 0.02}, K, I, Eigen::Vector2d(50, 50)).valid);
}

TEST_CASE("depth prior: target and zero loss at the target") {
  const geo::PoseSE3 I{geo::Mat3::Identity(), geo::Vec3::Zero()};
  const auto y = depth_prior_target(Eigen::Vector3d(0, 0, 1), I, 2.0);
  CHECK((y - Eigen::Vector3d(0, 0, 2)).norm() == 0.0);
  CHECK(depth_prior_loss({y, 1.0}, Eigen::Vector3d(0, 0, 1), I, 2.0) == 0.0);
}

TEST_CASE("regressor loss gradients match finite differences") {
  ad::GradCheckOptions opts;
  opts.configs = 20;
  for (const auto& r : run_regressor_gradchecks(opts)) {
    INFO(r.name);
    CHECK(r.max_rel_error < 1e-4);
  }
}

TEST_CASE("regressor checkpoint round-trip") {
  auto m = Regressor<float>::init(small_cfg(), 4);
  const auto path = std::filesystem::temp_directory_path() / "aceg_test_model.prm";
  save_regressor(m, path);
  auto back = load_regressor(small_cfg(), path);
  for (std::size_t i = 0; i < m.params().size(); ++i) {
    CHECK((m.params()[i].value() - back.params()[i].value()).cwiseAbs().maxCoeff() == 0.0f);
  }
  auto other = small_cfg();
  other.model_dim = 8;
  CHECK_THROWS(load_regressor(other, path));
  std::filesystem::remove(path);
}
