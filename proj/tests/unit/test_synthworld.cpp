#include <doctest.h>

#include <cmath>
#include <set>

#include "aceg/common/error.hpp"
#include "aceg/common/random.hpp"
#include "aceg/synthworld/augment.hpp"
#include "aceg/synthworld/feature_oracle.hpp"
#include "aceg/synthworld/render.hpp"
#include "aceg/synthworld/scene.hpp"
#include "aceg/synthworld/scene_io.hpp"
#include "aceg/synthworld/split.hpp"
#include "aceg/synthworld/tuple.hpp"

using namespace aceg;
using namespace aceg::world;

TEST_CASE("gen_scene: deterministic, inside the box, centred") {
  SceneConfig cfg;
  const auto a = gen_scene(cfg, 3), b = gen_scene(cfg, 3);
  CHECK(a.size() == 512);
  CHECK(a.points == b.points);
  CHECK(a.latents == b.latents);
  for (int i = 0; i < a.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      CHECK(a.points(i, k) >= cfg.box_min(k));
      CHECK(a.points(i, k) <= cfg.box_max(k));
    }
  }
  cfg.num_points = 10'000;
  const auto big = gen_scene(cfg, 4);
  const Eigen::Vector3d extent = cfg.box_max - cfg.box_min;
  const Eigen::Vector3d off = big.centroid() - big.box_center();
  for (int k = 0; k < 3; ++k) CHECK(std::abs(off(k)) <= 0.1 * extent(k));
}

TEST_CASE("gen_trajectory: rotations, smoothness, visibility") {
  const auto scene = gen_scene({}, 5);
  TrajectoryConfig tc;
  const auto frames = gen_trajectory(scene, 40, 6, tc);
  REQUIRE(frames.size() == 40);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& R = frames[i].T_wc.R;
    CHECK((R.transpose() * R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(static_cast<int>(visible_points(scene, frames[i]).size()) >= 32);
    if (i > 0) CHECK((frames[i].T_wc.t - frames[i - 1].T_wc.t).norm() < 0.1 * tc.radius);
  }
}

TEST_CASE("feature oracle: determinism, condition drift, monotone decorrelation") {
  FeatureOracleConfig cfg;
  cfg.noise = 0.0;
  const FeatureOracle oracle(cfg);
  Rng rng(7);
  Eigen::VectorXd a(cfg.latent_dim);
  for (int i = 0; i < a.size(); ++i) a(i) = normal(rng);
  const Eigen::Vector3d v(0, 0, 1);
  CHECK(oracle.embed(a, v, 0.0, 1) == oracle.embed(a, v, 0.0, 2));
  CHECK((oracle.embed(a, v, 0.0, 1) - oracle.embed(a, v, 1.0, 1)).norm() > 0.0);

  std::vector<Eigen::VectorXd> lat;
  for (int i = 0; i < 1000; ++i) {
    Eigen::VectorXd x(cfg.latent_dim);
    for (int j = 0; j < x.size(); ++j) x(j) = normal(rng);
    lat.push_back(x);
  }
  double prev = 2.0;
  for (double alpha : {0.0, 0.25, 0.5, 1.0, 2.0}) {
    auto c = cfg;
    c.alpha = alpha;
    const FeatureOracle o(c);
    double sxy = 0, sxx = 0, syy = 0, sx = 0, sy = 0;
    int n = 0;
    for (const auto& x : lat) {
      const auto e0 = o.embed(x, v, 0.0, 0), e1 = o.embed(x, v, 1.0, 0);
      for (int j = 0; j < e0.size(); ++j) {
        sx += e0(j), sy += e1(j), sxx += e0(j) * e0(j), syy += e1(j) * e1(j), sxy += e0(j) * e1(j);
        ++n;
      }
    }
    const double corr = (sxy - sx * sy / n) / std::sqrt((sxx - sx * sx / n) * (syy - sy * sy / n));
    CHECK(corr < prev);
    prev = corr;
  }
}

TEST_CASE("render_view: in front, inside the image, pixels reproduce") {
  const auto scene = gen_scene({}, 8);
  const auto frames = gen_trajectory(scene, 10, 9);
  const FeatureOracle oracle({});
  for (const auto& f : frames) {
    const auto view = render_view(scene, f, oracle, 0.5, 10);
    CHECK(!view.observations.empty());
    for (const auto& o : view.observations) {
      const auto p = geo::project(f.K, f.T_wc, o.point);
      CHECK(p.valid);
      CHECK(p.z > 0.0);
      CHECK(o.pixel.x() >= 0.0);
      CHECK(o.pixel.x() < f.width);
      CHECK(o.pixel.y() >= 0.0);
      CHECK(o.pixel.y() < f.height);
      CHECK((p.pixel - o.pixel).norm() < 1e-9);
    }
  }
  // a camera looking away from every point sees nothing
  auto away = frames[0];
  away.T_wc = look_at(Eigen::Vector3d(50, 0, 0), Eigen::Vector3d(100, 0, 0));
  CHECK(render_view(scene, away, oracle, 0.0, 1).observations.empty());
}

TEST_CASE("sample_split: disjoint halves, QMQ pattern, interspersed intervals") {
  SplitConfig cfg;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto s = sample_split(10, cfg, seed);
    std::set<int> m(s.mapping.begin(), s.mapping.end());
    for (int q : s.query) CHECK(m.count(q) == 0);
    CHECK(s.mapping.size() + s.query.size() == 10);
    // Q..Q M..M Q..Q: the mapping block is contiguous and touches neither end
    CHECK(!s.mapping.empty());
    CHECK(s.mapping.back() - s.mapping.front() + 1 == static_cast<int>(s.mapping.size()));
    CHECK(s.mapping.front() > 0);
    CHECK(s.mapping.back() < 9);
  }
  cfg.scheme = SplitScheme::Interspersed;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto s = sample_split(100, cfg, seed);
    int intervals = 0;
    for (std::size_t i = 0; i < s.mapping.size(); ++i) intervals += i == 0 || s.mapping[i] != s.mapping[i - 1] + 1;
    CHECK(intervals >= 2);
  }
  CHECK(parse_split_scheme("qmq") == SplitScheme::QueryMappingQuery);
  CHECK_THROWS(parse_split_scheme("zigzag"));
}

TEST_CASE("apply_augment: projections unchanged, deterministic, orthonormal") {
  const auto scene = gen_scene({}, 11);
  SceneInstance inst{scene, gen_trajectory(scene, 8, 12)};
  const AugmentConfig cfg{true, false};
  const auto a = apply_augment(inst, cfg, 13), b = apply_augment(inst, cfg, 13);
  CHECK(a.scene.points == b.scene.points);
  for (std::size_t f = 0; f < inst.frames.size(); ++f) {
    for (int i = 0; i < scene.size(); ++i) {
      const auto p0 = geo::project(inst.frames[f].K, inst.frames[f].T_wc, inst.scene.points.row(i).transpose());
      const auto p1 = geo::project(a.frames[f].K, a.frames[f].T_wc, a.scene.points.row(i).transpose());
      CHECK(p0.valid == p1.valid);
      if (p0.valid) CHECK((p0.pixel - p1.pixel).norm() < 1e-9);
    }
  }
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto R = random_rotation(s);
    CHECK((R.transpose() * R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(R.determinant() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("tuple: deterministic, control set, file round-trip") {
  WorldConfig cfg;
  cfg.scene.num_points = 64;
  cfg.frames = 20;
  const FeatureOracle oracle(cfg.oracle);
  const auto t = make_tuple(cfg, oracle, 21, "t");
  const auto u = make_tuple(cfg, oracle, 21, "t");
  const auto bytes = encode_tuple(t);
  CHECK(bytes == encode_tuple(u));
  CHECK(t.control.size() == t.query.size());
  for (std::size_t i = 0; i < t.query.size(); ++i) CHECK(t.control[i].frame.index == t.query[i].frame.index);
  const auto back = decode_tuple(bytes);
  CHECK(encode_tuple(back) == bytes);
  auto bad = bytes;
  bad[0] = 'Z';
  CHECK_THROWS_AS(decode_tuple(bad), FormatError);
  CHECK_THROWS_AS(decode_tuple(std::span(bytes).first(bytes.size() - 1)), FormatError);
}
