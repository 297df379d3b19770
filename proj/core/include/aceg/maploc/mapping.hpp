#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "aceg/buffers/buffers.hpp"
#include "aceg/common/kv.hpp"
#include "aceg/regressor/map_code.hpp"
#include "aceg/regressor/model.hpp"

namespace aceg::maploc {

struct MappingRunConfig {
  int iterations = 300;
  int batch = 1024;         // records per step
  double lr_max = 0.002;    // one-cycle peak
  double weight_decay = 0.0;
  double dropout = 0.1;     // per embedding coordinate
  double trim = 0.3;        // fraction of lowest per-record losses kept
  std::int64_t buffer_cap = buf::kNovelCap;
  std::uint64_t seed = 0;

  void validate() const;
  void write(KeyValues& kv, const std::string& prefix = "mapping.") const;
  static MappingRunConfig read(const KeyValues& kv, const std::string& prefix = "mapping.");
};

/// "fast" and "thorough"; the second runs five times as long.
MappingRunConfig mapping_preset(const std::string& name);

struct MappingStats {
  int steps = 0;
  int valid = 0;    // records scored by the 2D loss, summed over steps
  int invalid = 0;  // records that fell back to the depth prior
  double first_loss = 0.0;
  double last_loss = 0.0;
};

using MappingProgress = std::function<void(int step, double loss, double lr)>;

/// Fits a fresh map code to a posed buffer with the regressor frozen.
reg::MapCode map_novel_scene(reg::Regressor<float>& model, const buf::NovelSceneBuffer& buffer, const MappingRunConfig& cfg,
                        const std::string& scene_id, MappingStats* stats = nullptr,
                        const MappingProgress& progress = {});

}  // namespace aceg::maploc
