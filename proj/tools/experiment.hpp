#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "aceg/buffers/manifest.hpp"
#include "aceg/maploc/localize.hpp"
#include "aceg/maploc/mapping.hpp"
#include "aceg/maploc/metrics.hpp"
#include "aceg/pretrain/pretrainer.hpp"
#include "aceg/synthworld/tuple.hpp"

namespace aceg::exp {

/// Everything one desk experiment needs, as one flat key-value document.
struct ExperimentConfig {
  world::WorldConfig world;
  int train_tuples = 32;
  int test_tuples = 8;
  std::int64_t buffer_cap = buf::kPretrainCap;
  reg::RegressorConfig model;
  pre::PretrainConfig pretrain;
  maploc::MappingRunConfig mapping;
  maploc::LocalizeConfig localize;
  std::uint64_t seed = 1;
  int workers = 1;

  /// Defaults calibrated for a single CPU core.
  static ExperimentConfig desk();

  void validate() const;
  KeyValues to_kv() const;
  /// Keys missing from `kv` keep their desk() values.
  static ExperimentConfig from_kv(const KeyValues& kv);
};

std::string tuple_id(int i);

/// Tuple i of the world; train tuples first, then test tuples.
world::SceneTuple make_world_tuple(const ExperimentConfig& cfg, const world::FeatureOracle& oracle, int i);

/// All train and test tuples in memory.
std::vector<world::SceneTuple> make_world(const ExperimentConfig& cfg);

/// Writes tuples/, buffers/, manifest.kv under `out`; returns the manifest.
buf::Manifest synthesize(const ExperimentConfig& cfg, const std::filesystem::path& out);

/// M/Q buffers of the first `train_tuples` tuples.
pre::PretrainDataset make_dataset(const std::vector<world::SceneTuple>& tuples, const ExperimentConfig& cfg);

/// Novel-scene buffer over the mapping renders, depth prior from the
/// mapping cameras.
buf::NovelSceneBuffer make_novel_buffer(const world::SceneTuple& t, const ExperimentConfig& cfg);

enum class ViewSet { Mapping, Query, Control };
ViewSet parse_view_set(const std::string& s);
const std::vector<world::ViewRender>& views_of(const world::SceneTuple& t, ViewSet s);

std::vector<maploc::LocalizeResult> localize_views(reg::Regressor<float>& model, const ad::Matrix<float>& code,
                                                   const std::vector<world::ViewRender>& views,
                                                   const maploc::LocalizeConfig& cfg);

/// Concatenates a KeyValues listing into a resolved-config file.
void write_resolved_config(const KeyValues& kv, const std::filesystem::path& dir);

}  // namespace aceg::exp
