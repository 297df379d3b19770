#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aceg/common/kv.hpp"
#include "aceg/synthworld/augment.hpp"
#include "aceg/synthworld/render.hpp"
#include "aceg/synthworld/split.hpp"

namespace aceg::world {

/// Everything needed to regenerate a family of scene tuples.
struct WorldConfig {
  SceneConfig scene;
  TrajectoryConfig trajectory;
  SplitConfig split;
  FeatureOracleConfig oracle;
  int frames = 40;
  double query_condition = 1.0;  // condition of query renders; mapping uses 0

  void validate() const;
  void write(KeyValues& kv, const std::string& prefix = "world.") const;
  static WorldConfig read(const KeyValues& kv, const std::string& prefix = "world.");
};

/// One scene with a mapping/query split. Mapping views are rendered at
/// condition 0 and query views at `query_condition`; the control set holds
/// the query frames re-rendered at condition 0 (the no-gap world).
struct SceneTuple {
  std::string id;
  std::uint64_t seed = 0;
  SceneInstance instance;
  Split split;
  double query_condition = 1.0;
  std::vector<ViewRender> mapping;
  std::vector<ViewRender> query;
  std::vector<ViewRender> control;
};

/// Deterministic in (cfg, oracle config, seed). Streams for scene, trajectory,
/// split, augmentation and per-view noise are split from `seed`.
SceneTuple make_tuple(const WorldConfig& cfg, const FeatureOracle& oracle, std::uint64_t seed, std::string id);

/// Mean distance from the given cameras to the scene centroid.
double mean_camera_distance(const SceneInstance& inst, const std::vector<int>& frame_ids);

}  // namespace aceg::world
