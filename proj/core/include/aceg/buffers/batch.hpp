#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "aceg/common/random.hpp"

namespace aceg::buf {

struct BatchSpec {
  int scenes_per_batch = 8;    // N_spb
  int patches_per_scene = 128; // N_pps

  void validate() const;
};

/// Records drawn for one scene. `slot` identifies the scene (and therefore
/// the map code) the rows belong to; rows index that scene's buffer.
struct BatchGroup {
  int slot = -1;
  std::vector<std::int64_t> rows;
};

struct Batch {
  std::vector<BatchGroup> groups;
  std::int64_t size() const;
};

/// Picks N_spb distinct slots uniformly from `eligible`, then N_pps rows with
/// replacement from each chosen slot's buffer (`buffer_sizes[slot]`).
/// Throws PreconditionError when fewer than N_spb slots are eligible; the
/// caller decides whether to shrink the batch.
Batch sample_batch(std::span<const int> eligible, std::span<const std::int64_t> buffer_sizes, const BatchSpec& spec,
                   Rng& rng);

/// n row indices drawn uniformly with replacement from [0, size).
std::vector<std::int64_t> sample_rows(std::int64_t size, std::int64_t n, Rng& rng);

}  // namespace aceg::buf
