#include "experiment.hpp"

#include <fstream>

#include "aceg/buffers/buffer_io.hpp"
#include "aceg/common/error.hpp"
#include "aceg/common/random.hpp"
#include "aceg/synthworld/scene_io.hpp"

namespace aceg::exp {

namespace {

constexpr std::uint64_t kTupleStream = 0x7475706c65ULL;
constexpr std::uint64_t kBufferStream = 0x627566ULL;
constexpr std::uint64_t kNovelStream = 0x6e6f76ULL;

}  // namespace

ExperimentConfig ExperimentConfig::desk() {
  ExperimentConfig c;
  c.world.scene.num_points = 64;
  c.pretrain.head_period = 1;
  c.pretrain.trim = 0.6;
  c.pretrain.iterations = 3000;
  c.mapping = maploc::mapping_preset("fast");
  return c;
}

void ExperimentConfig::validate() const {
  world.validate();
  model.validate();
  pretrain.validate();
  mapping.validate();
  if (train_tuples < 0 || test_tuples < 0 || train_tuples + test_tuples < 1) {
    throw ConfigError("experiment: need at least one tuple");
  }
  if (buffer_cap < 1) throw ConfigError("experiment: buffer_cap must be >= 1");
  if (workers < 1) throw ConfigError("experiment: workers must be >= 1");
  if (model.feat_dim != world.oracle.feat_dim) throw ConfigError("model.feat_dim must equal world.oracle.feat_dim");
  if (!(localize.p > 0.0 && localize.p < 1.0) || !(localize.f > 0.0)) {
    throw ConfigError("localize: p must lie in (0, 1) and f must be positive");
  }
  if (localize.ransac.max_iters < 1 || !(localize.ransac.inlier_thresh_px > 0.0)) {
    throw ConfigError("localize: bad RANSAC settings");
  }
}

KeyValues ExperimentConfig::to_kv() const {
  KeyValues kv;
  kv.set("seed", seed);
  kv.set("workers", workers);
  kv.set("synth.train_tuples", train_tuples);
  kv.set("synth.test_tuples", test_tuples);
  kv.set("synth.buffer_cap", buffer_cap);
  world.write(kv);
  model.write(kv);
  pretrain.write(kv);
  mapping.write(kv);
  kv.set("localize.prefilter", localize.use_prefilter);
  kv.set("localize.p", localize.p);
  kv.set("localize.f", localize.f);
  kv.set("localize.inlier_px", localize.ransac.inlier_thresh_px);
  kv.set("localize.max_iters", localize.ransac.max_iters);
  kv.set("localize.confidence", localize.ransac.confidence);
  kv.set("localize.refine_iters", localize.ransac.refine_iters);
  kv.set("localize.seed", localize.ransac.seed);
  return kv;
}

ExperimentConfig ExperimentConfig::from_kv(const KeyValues& overrides) {
  KeyValues kv = desk().to_kv();
  for (const auto& [k, v] : overrides.entries()) {
    // run annotations written next to outputs; informational only
    if (k == "mapping.preset" || k == "localize.set") continue;
    if (!kv.has(k)) throw ConfigError("unknown config key '" + k + "'");
  }
  kv.merge(overrides);
  ExperimentConfig c;
  c.seed = static_cast<std::uint64_t>(kv.get_int("seed"));
  c.workers = static_cast<int>(kv.get_int("workers"));
  c.train_tuples = static_cast<int>(kv.get_int("synth.train_tuples"));
  c.test_tuples = static_cast<int>(kv.get_int("synth.test_tuples"));
  c.buffer_cap = kv.get_int("synth.buffer_cap");
  c.world = world::WorldConfig::read(kv);
  c.model = reg::RegressorConfig::read(kv);
  c.pretrain = pre::PretrainConfig::read(kv);
  c.mapping = maploc::MappingRunConfig::read(kv);
  c.localize.use_prefilter = kv.get_bool("localize.prefilter", true);
  c.localize.p = kv.get_double("localize.p");
  c.localize.f = kv.get_double("localize.f");
  c.localize.ransac.inlier_thresh_px = kv.get_double("localize.inlier_px");
  c.localize.ransac.max_iters = static_cast<int>(kv.get_int("localize.max_iters"));
  c.localize.ransac.confidence = kv.get_double("localize.confidence");
  c.localize.ransac.refine_iters = static_cast<int>(kv.get_int("localize.refine_iters"));
  c.localize.ransac.seed = static_cast<std::uint64_t>(kv.get_int("localize.seed"));
  c.validate();
  return c;
}

std::string tuple_id(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "t%03d", i);
  return buf;
}

world::SceneTuple make_world_tuple(const ExperimentConfig& cfg, const world::FeatureOracle& oracle, int i) {
  return world::make_tuple(cfg.world, oracle, derive_seed(cfg.seed, {kTupleStream, static_cast<std::uint64_t>(i)}),
                           tuple_id(i));
}

std::vector<world::SceneTuple> make_world(const ExperimentConfig& cfg) {
  const world::FeatureOracle oracle(cfg.world.oracle);
  std::vector<world::SceneTuple> out;
  for (int i = 0; i < cfg.train_tuples + cfg.test_tuples; ++i) out.push_back(make_world_tuple(cfg, oracle, i));
  return out;
}

buf::Manifest synthesize(const ExperimentConfig& cfg, const std::filesystem::path& out) {
  cfg.validate();
  std::filesystem::create_directories(out / "tuples");
  std::filesystem::create_directories(out / "buffers");
  const world::FeatureOracle oracle(cfg.world.oracle);
  buf::Manifest m;
  for (int i = 0; i < cfg.train_tuples + cfg.test_tuples; ++i) {
    const auto t = make_world_tuple(cfg, oracle, i);
    buf::ManifestEntry e;
    e.id = t.id;
    e.scene = "tuples/" + t.id + ".scn";
    e.mapping = "buffers/" + t.id + ".M.buf";
    e.query = "buffers/" + t.id + ".Q.buf";
    e.split = i < cfg.train_tuples ? "train" : "test";
    world::save_tuple(t, out / e.scene);
    const auto [M, Q] = buf::build_pretrain_buffers(
        t, cfg.buffer_cap, derive_seed(cfg.seed, {kBufferStream, static_cast<std::uint64_t>(i)}));
    buf::save_buffer(M, out / e.mapping);
    buf::save_buffer(Q, out / e.query);
    m.entries.push_back(std::move(e));
  }
  m.meta = cfg.to_kv();
  m.save(out / "manifest.kv");
  return m;
}

pre::PretrainDataset make_dataset(const std::vector<world::SceneTuple>& tuples, const ExperimentConfig& cfg) {
  pre::PretrainDataset d;
  for (int i = 0; i < cfg.train_tuples; ++i) {
    auto [M, Q] = buf::build_pretrain_buffers(tuples.at(static_cast<std::size_t>(i)), cfg.buffer_cap,
                                              derive_seed(cfg.seed, {kBufferStream, static_cast<std::uint64_t>(i)}));
    d.mapping.push_back(std::move(M));
    d.query.push_back(std::move(Q));
  }
  d.validate();
  return d;
}

buf::NovelSceneBuffer make_novel_buffer(const world::SceneTuple& t, const ExperimentConfig& cfg) {
  const double d0 = world::mean_camera_distance(t.instance, t.split.mapping);
  return buf::build_novel_buffer(t.id, t.mapping, cfg.mapping.buffer_cap, derive_seed(t.seed, {kNovelStream}), d0);
}

ViewSet parse_view_set(const std::string& s) {
  if (s == "mapping") return ViewSet::Mapping;
  if (s == "query") return ViewSet::Query;
  if (s == "control") return ViewSet::Control;
  throw ConfigError("unknown view set '" + s + "' (mapping|query|control)");
}

const std::vector<world::ViewRender>& views_of(const world::SceneTuple& t, ViewSet s) {
  switch (s) {
    case ViewSet::Mapping: return t.mapping;
    case ViewSet::Query: return t.query;
    case ViewSet::Control: return t.control;
  }
  return t.query;
}

std::vector<maploc::LocalizeResult> localize_views(reg::Regressor<float>& model, const ad::Matrix<float>& code,
                                                   const std::vector<world::ViewRender>& views,
                                                   const maploc::LocalizeConfig& cfg) {
  std::vector<maploc::LocalizeResult> out;
  for (const auto& v : views) {
    if (v.observations.size() < static_cast<std::size_t>(maploc::kMinCorrespondences)) {
      // too few visible patches to attempt a solve; counts as a failure
      maploc::LocalizeResult r;
      r.frame = v.frame.index;
      r.correspondences = static_cast<int>(v.observations.size());
      r.has_gt = true;
      out.push_back(r);
      continue;
    }
    out.push_back(maploc::localize_with_gt(model, code, v, cfg));
  }
  return out;
}

void write_resolved_config(const KeyValues& kv, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  kv.save(dir / "config.kv");
}

}  // namespace aceg::exp
