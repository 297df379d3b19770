// Hot paths: regressor forward/backward, RANSAC-PnP, one mapping step.
#include <benchmark/benchmark.h>

#include "aceg/autodiff/graph.hpp"
#include "aceg/common/random.hpp"
#include "aceg/geometry/pnp.hpp"
#include "aceg/maploc/mapping.hpp"
#include "aceg/regressor/model.hpp"
#include "aceg/synthworld/tuple.hpp"
#include "aceg/buffers/buffers.hpp"

using namespace aceg;

namespace {

ad::Matrix<float> random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  Rng rng(seed);
  ad::Matrix<float> m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<float>(normal(rng));
  return m;
}

void BM_RegressorForward(benchmark::State& st) {
  auto model = reg::Regressor<float>::init({}, 1);
  const auto e = random_matrix(st.range(0), model.config().feat_dim, 2);
  const auto c = random_matrix(model.config().code_tokens, model.config().code_dim, 3);
  for (auto _ : st) {
    ad::Graph<float> g;
    auto out = model.forward(g, g.constant(e), g.constant(c), false);
    benchmark::DoNotOptimize(g.value(out).data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_RegressorForward)->Arg(128)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_RegressorForwardBackward(benchmark::State& st) {
  auto model = reg::Regressor<float>::init({}, 1);
  const auto e = random_matrix(st.range(0), model.config().feat_dim, 2);
  const auto c = random_matrix(model.config().code_tokens, model.config().code_dim, 3);
  for (auto _ : st) {
    ad::Graph<float> g;
    auto out = model.forward(g, g.constant(e), g.variable(c), true);
    g.backward(g.sum(out));
    benchmark::ClobberMemory();
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_RegressorForwardBackward)->Arg(128)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_RansacPnP(benchmark::State& st) {
  const geo::Intrinsics K{128, 128, 128, 128};
  Rng rng(7);
  const geo::PoseSE3 T{geo::so3_exp(geo::Vec3(0.1, -0.2, 0.3)), geo::Vec3(0.5, -0.3, 1.0)};
  std::vector<geo::Correspondence2D3D> corrs;
  while (static_cast<std::int64_t>(corrs.size()) < st.range(0)) {
    const auto y = T.to_world(geo::Vec3(uniform(rng, -2, 2), uniform(rng, -2, 2), uniform(rng, 3, 8)));
    auto p = geo::project(K, T, y);
    if (!p.valid) continue;
    if (corrs.size() % 3 == 0) p.pixel = geo::Vec2(uniform(rng, 0, 256), uniform(rng, 0, 256));
    corrs.push_back({p.pixel, y, 0.0});
  }
  geo::RansacConfig rc;
  for (auto _ : st) benchmark::DoNotOptimize(geo::ransac_pnp(corrs, K, rc));
}
BENCHMARK(BM_RansacPnP)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_MappingStep(benchmark::State& st) {
  world::WorldConfig wc;
  const auto t = world::make_tuple(wc, world::FeatureOracle(wc.oracle), 11, "bench");
  const auto buffer = buf::build_novel_buffer(t.id, t.mapping, buf::kNovelCap, 1);
  auto model = reg::Regressor<float>::init({}, 1);
  maploc::MappingRunConfig mc;
  mc.iterations = 10;
  mc.batch = static_cast<int>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(maploc::map_novel_scene(model, buffer, mc, t.id));
  st.SetItemsProcessed(st.iterations() * mc.iterations);
}
BENCHMARK(BM_MappingStep)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
