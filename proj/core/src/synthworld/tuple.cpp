#include "aceg/synthworld/tuple.hpp"

#include "aceg/common/error.hpp"
#include "aceg/common/random.hpp"

namespace aceg::world {

namespace {
enum Stream : std::uint64_t { kScene = 1, kTrajectory, kSplit, kAugment, kNoise };
enum RenderSet : std::uint64_t { kMappingSet = 0, kQuerySet, kControlSet };
}  // namespace

void WorldConfig::validate() const {
  scene.validate();
  trajectory.validate();
  split.validate();
  oracle.validate();
  if (oracle.latent_dim != scene.latent_dim) throw ConfigError("oracle latent_dim must match scene latent_dim");
  if (frames < 4) throw ConfigError("world needs at least 4 frames per tuple");
  if (!(query_condition >= 0.0 && query_condition <= 1.0)) throw ConfigError("query_condition must lie in [0, 1]");
}

void WorldConfig::write(KeyValues& kv, const std::string& p) const {
  kv.set(p + "points", scene.num_points);
  kv.set(p + "latent_dim", scene.latent_dim);
  kv.set(p + "frames", frames);
  kv.set(p + "query_condition", query_condition);
  kv.set(p + "orbit_radius", trajectory.radius);
  kv.set(p + "min_visible", trajectory.min_visible);
  kv.set(p + "split.scheme", to_string(split.scheme));
  kv.set(p + "split.mapping_len_lo", split.mapping_len_lo);
  kv.set(p + "split.mapping_len_hi", split.mapping_len_hi);
  kv.set(p + "split.query_len_lo", split.query_len_lo);
  kv.set(p + "split.query_len_hi", split.query_len_hi);
  kv.set(p + "split.random_rotation", split.random_rotation);
  kv.set(p + "split.mirror", split.mirror);
  kv.set(p + "oracle.feat_dim", oracle.feat_dim);
  kv.set(p + "oracle.hidden", oracle.hidden);
  kv.set(p + "oracle.pre_scale", oracle.pre_scale);
  kv.set(p + "oracle.alpha", oracle.alpha);
  kv.set(p + "oracle.beta", oracle.beta);
  kv.set(p + "oracle.noise", oracle.noise);
  kv.set(p + "oracle.seed", oracle.seed);
}

WorldConfig WorldConfig::read(const KeyValues& kv, const std::string& p) {
  WorldConfig c;
  c.scene.num_points = static_cast<int>(kv.get_int(p + "points", c.scene.num_points));
  c.scene.latent_dim = static_cast<int>(kv.get_int(p + "latent_dim", c.scene.latent_dim));
  c.frames = static_cast<int>(kv.get_int(p + "frames", c.frames));
  c.query_condition = kv.get_double(p + "query_condition", c.query_condition);
  c.trajectory.radius = kv.get_double(p + "orbit_radius", c.trajectory.radius);
  c.trajectory.min_visible = static_cast<int>(kv.get_int(p + "min_visible", c.trajectory.min_visible));
  c.split.scheme = parse_split_scheme(kv.get_string(p + "split.scheme", to_string(c.split.scheme)));
  c.split.mapping_len_lo = static_cast<int>(kv.get_int(p + "split.mapping_len_lo", c.split.mapping_len_lo));
  c.split.mapping_len_hi = static_cast<int>(kv.get_int(p + "split.mapping_len_hi", c.split.mapping_len_hi));
  c.split.query_len_lo = static_cast<int>(kv.get_int(p + "split.query_len_lo", c.split.query_len_lo));
  c.split.query_len_hi = static_cast<int>(kv.get_int(p + "split.query_len_hi", c.split.query_len_hi));
  c.split.random_rotation = kv.get_bool(p + "split.random_rotation", c.split.random_rotation);
  c.split.mirror = kv.get_bool(p + "split.mirror", c.split.mirror);
  c.oracle.latent_dim = c.scene.latent_dim;
  c.oracle.feat_dim = static_cast<int>(kv.get_int(p + "oracle.feat_dim", c.oracle.feat_dim));
  c.oracle.hidden = static_cast<int>(kv.get_int(p + "oracle.hidden", c.oracle.hidden));
  c.oracle.pre_scale = kv.get_double(p + "oracle.pre_scale", c.oracle.pre_scale);
  c.oracle.alpha = kv.get_double(p + "oracle.alpha", c.oracle.alpha);
  c.oracle.beta = kv.get_double(p + "oracle.beta", c.oracle.beta);
  c.oracle.noise = kv.get_double(p + "oracle.noise", c.oracle.noise);
  c.oracle.seed = static_cast<std::uint64_t>(kv.get_int(p + "oracle.seed", static_cast<std::int64_t>(c.oracle.seed)));
  c.validate();
  return c;
}

SceneTuple make_tuple(const WorldConfig& cfg, const FeatureOracle& oracle, std::uint64_t seed, std::string id) {
  cfg.validate();
  SceneTuple t;
  t.id = std::move(id);
  t.seed = seed;
  t.query_condition = cfg.query_condition;
  t.instance.scene = gen_scene(cfg.scene, derive_seed(seed, {kScene}), t.id);
  t.instance.frames = gen_trajectory(t.instance.scene, cfg.frames, derive_seed(seed, {kTrajectory}), cfg.trajectory);
  t.split = sample_split(cfg.frames, cfg.split, derive_seed(seed, {kSplit}));
  // A rotation only moves the world frame; pixels and embeddings are
  // unchanged. Mirroring flips the images, so it has to precede rendering.
  if (cfg.split.random_rotation || cfg.split.mirror) {
    t.instance = apply_augment(t.instance, {cfg.split.random_rotation, cfg.split.mirror},
                               derive_seed(seed, {kAugment}));
  }
  auto render_set = [&](const std::vector<int>& ids, double condition, RenderSet set) {
    std::vector<ViewRender> out;
    out.reserve(ids.size());
    for (int f : ids) {
      out.push_back(render_view(t.instance.scene, t.instance.frames[f], oracle, condition,
                                derive_seed(seed, {kNoise, set, static_cast<std::uint64_t>(f)})));
    }
    return out;
  };
  t.mapping = render_set(t.split.mapping, 0.0, kMappingSet);
  t.query = render_set(t.split.query, cfg.query_condition, kQuerySet);
  t.control = render_set(t.split.query, 0.0, kControlSet);
  return t;
}

double mean_camera_distance(const SceneInstance& inst, const std::vector<int>& frame_ids) {
  if (frame_ids.empty()) throw PreconditionError("mean_camera_distance of no frames");
  const Eigen::Vector3d c = inst.scene.centroid();
  double acc = 0.0;
  for (int f : frame_ids) acc += (inst.frames.at(f).T_wc.t - c).norm();
  return acc / static_cast<double>(frame_ids.size());
}

}  // namespace aceg::world
