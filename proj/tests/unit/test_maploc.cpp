#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "aceg/buffers/buffers.hpp"
#include "aceg/common/error.hpp"
#include "aceg/common/random.hpp"
#include "aceg/maploc/localize.hpp"
#include "aceg/maploc/mapping.hpp"
#include "aceg/maploc/metrics.hpp"
#include "aceg/synthworld/tuple.hpp"

using namespace aceg;
using namespace aceg::maploc;

namespace {

reg::RegressorConfig tiny_model() {
  reg::RegressorConfig c;
  c.model_dim = 16;
  c.blocks = 1;
  c.heads = 2;
  c.head_hidden = 16;
  c.code_tokens = 8;
  c.code_dim = 8;
  return c;
}

const world::SceneTuple& fixture() {
  static const world::SceneTuple t = [] {
    world::WorldConfig cfg;
    cfg.scene.num_points = 64;
    cfg.frames = 20;
    return world::make_tuple(cfg, world::FeatureOracle(cfg.oracle), 77, "m0");
  }();
  return t;
}

std::vector<ScenePrediction> with_sigmas(const std::vector<double>& s) {
  std::vector<ScenePrediction> out;
  for (double v : s) out.push_back({Eigen::Vector2d::Zero(), Eigen::Vector3d::Zero(), v});
  return out;
}

bool bits_equal(const ad::Matrix<float>& a, const ad::Matrix<float>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), sizeof(float) * a.size()) == 0;
}

}  // namespace

TEST_CASE("map_novel_scene: head untouched, reproducible, loss goes down") {
  auto model = reg::Regressor<float>::init(tiny_model(), 1);
  std::vector<ad::Matrix<float>> before;
  for (const auto& p : model.params()) before.push_back(p.value());
  const auto buffer = buf::build_novel_buffer("m0", fixture().mapping, buf::kNovelCap, 2, 5.0);
  MappingRunConfig cfg;
  cfg.iterations = 40;
  cfg.batch = 64;
  cfg.dropout = 0.0;
  cfg.seed = 9;
  MappingStats st;
  const auto a = map_novel_scene(model, buffer, cfg, "m0", &st);
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(bits_equal(before[i], model.params()[i].value()));
  const auto b = map_novel_scene(model, buffer, cfg, "m0");
  CHECK(bits_equal(a.tokens, b.tokens));
  CHECK(a.iteration == 40);
  CHECK(st.steps == 40);
  CHECK(st.valid + st.invalid == 40 * 64);
  cfg.dropout = 0.1;
  CHECK(bits_equal(map_novel_scene(model, buffer, cfg, "m0").tokens, map_novel_scene(model, buffer, cfg, "m0").tokens));
  buf::NovelSceneBuffer empty = buffer;
  empty.embeddings.resize(0, buffer.embeddings.cols());
  empty.pixels.resize(0, 2);
  empty.camera_index.clear();
  CHECK_THROWS_AS(map_novel_scene(model, empty, cfg, "m0"), PreconditionError);
  cfg.dropout = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("mapping presets") {
  const auto fast = mapping_preset("fast"), thorough = mapping_preset("thorough");
  CHECK(thorough.iterations == 5 * fast.iterations);
  CHECK(fast.dropout == 0.03);
  CHECK(MappingRunConfig{}.dropout == 0.1);
  CHECK(fast.lr_max == 0.002);
  CHECK_THROWS_AS(mapping_preset("slow"), ConfigError);
  KeyValues kv;
  fast.write(kv);
  CHECK(MappingRunConfig::read(kv).iterations == fast.iterations);
}

TEST_CASE("predict_scene_coords: length, loop oracle, token permutation") {
  auto model = reg::Regressor<double>::init(tiny_model(), 3);
  Rng rng(4);
  ad::Matrix<double> code(8, 8);
  for (Eigen::Index i = 0; i < code.size(); ++i) code.data()[i] = normal(rng, 0.0, 0.5);
  const auto& obs = fixture().mapping[0].observations;
  const auto preds = predict_scene_coords(model, code, obs);
  REQUIRE(preds.size() == obs.size());
  std::vector<int> perm(8);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  ad::Matrix<double> pc(8, 8);
  for (int i = 0; i < 8; ++i) pc.row(i) = code.row(perm[i]);
  const auto permuted = predict_scene_coords(model, pc, obs);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const auto one = model.regress(obs[i].embedding.cast<double>(), code);
    CHECK((one.y - preds[i].y).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(one.sigma - preds[i].sigma) < 1e-12);
    CHECK((permuted[i].y - preds[i].y).norm() <= 1e-10 * preds[i].y.norm());
    CHECK(preds[i].pixel == obs[i].pixel);
  }
}

TEST_CASE("prefilter: worked example, equal sigmas, large f") {
  const auto r = prefilter(with_sigmas({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}), 0.1, 2.0);
  CHECK(r.quantile == 1.0);
  CHECK(r.threshold == 2.0);
  CHECK(r.fallback);
  CHECK(r.kept == std::vector<std::size_t>{0, 1, 2, 3, 4, 5});

  const auto eq = prefilter(with_sigmas(std::vector<double>(20, 0.3)), 0.1, 2.0);
  CHECK(eq.kept.size() == 20);
  CHECK_FALSE(eq.fallback);

  Rng rng(5);
  std::vector<double> s(50);
  for (auto& v : s) v = std::exp(normal(rng, 0.0, 2.0));
  CHECK(prefilter(with_sigmas(s), 0.1, 1e300).kept.size() == 50);
  CHECK_THROWS_AS(prefilter({}, 0.1, 2.0), PreconditionError);
}

TEST_CASE("prefilter: subset of the input and monotone in f") {
  Rng rng(6);
  for (int t = 0; t < 100; ++t) {
    const int n = static_cast<int>(uniform_int(rng, 1, 200));
    std::vector<double> s(static_cast<std::size_t>(n));
    for (auto& v : s) v = std::exp(normal(rng, 0.0, 1.0));
    const auto preds = with_sigmas(s);
    const double f1 = uniform(rng, 1.0, 5.0), f2 = f1 * uniform(rng, 1.0, 3.0);
    const auto a = prefilter(preds, 0.1, f1), b = prefilter(preds, 0.1, f2);
    CHECK(std::is_sorted(a.kept.begin(), a.kept.end()));
    for (auto i : a.kept) CHECK(i < s.size());
    if (!a.fallback && !b.fallback) CHECK(std::includes(b.kept.begin(), b.kept.end(), a.kept.begin(), a.kept.end()));
    CHECK(a.kept.size() >= std::min<std::size_t>(6, s.size()));
  }
}

TEST_CASE("localize: precondition and counts") {
  auto model = reg::Regressor<float>::init(tiny_model(), 7);
  const ad::Matrix<float> code = ad::Matrix<float>::Zero(8, 8);
  auto view = fixture().mapping[0];
  LocalizeConfig cfg;
  const auto r = localize(model, code, view, cfg);
  CHECK(r.correspondences == static_cast<int>(view.observations.size()));
  CHECK(r.filtered <= r.correspondences);
  CHECK(r.inliers <= r.filtered);
  view.observations.resize(5);
  CHECK_THROWS_AS(localize(model, code, view, cfg), PreconditionError);
}

TEST_CASE("evaluate: exact poses, half failures, median oracle") {
  const geo::PoseSE3 gt{geo::Mat3::Identity(), geo::Vec3(1, 2, 3)};
  std::vector<LocalizeResult> res(4);
  for (auto& r : res) {
    r.success = true;
    r.pose = gt;
  }
  const std::vector<geo::PoseSE3> gts(4, gt);
  auto rep = evaluate(res, gts);
  CHECK(rep.median_translation == 0.0);
  CHECK(rep.median_rotation_deg == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(rep.accuracy_at(5.0, 0.1) == 1.0);
  CHECK(rep.failure_rate == 0.0);
  res[1].success = res[3].success = false;
  rep = evaluate(res, gts);
  CHECK(rep.accuracy_at(5.0, 0.1) == 0.5);
  CHECK(rep.failure_rate == 0.5);

  Rng rng(8);
  std::vector<LocalizeResult> rr(101);
  std::vector<double> t;
  for (auto& r : rr) {
    r.has_gt = true;
    r.success = uniform(rng, 0.0, 1.0) < 0.8;
    r.error.translation = std::abs(normal(rng));
    r.error.rotation_deg = std::abs(normal(rng, 0.0, 5.0));
    if (r.success) t.push_back(r.error.translation);
  }
  std::sort(t.begin(), t.end());
  const double oracle = t.size() % 2 ? t[t.size() / 2] : 0.5 * (t[t.size() / 2 - 1] + t[t.size() / 2]);
  const auto rep2 = evaluate(rr);
  CHECK(rep2.median_translation == oracle);
  CHECK(rep2.successes == static_cast<int>(t.size()));
  CHECK(std::isnan(median({})));
  const auto table = rep2.to_table();
  CHECK(table.find("failure_rate") != std::string::npos);
  CHECK(rep2.records_text().find(" fail ") != std::string::npos);
}
