#include "aceg/buffers/batch.hpp"

#include <algorithm>

#include "aceg/common/error.hpp"

namespace aceg::buf {

void BatchSpec::validate() const {
  if (scenes_per_batch < 1 || patches_per_scene < 1) throw ConfigError("N_spb and N_pps must be >= 1");
}

std::int64_t Batch::size() const {
  std::int64_t n = 0;
  for (const auto& g : groups) n += static_cast<std::int64_t>(g.rows.size());
  return n;
}

std::vector<std::int64_t> sample_rows(std::int64_t size, std::int64_t n, Rng& rng) {
  if (size < 1) throw PreconditionError("cannot sample from an empty buffer");
  std::uniform_int_distribution<std::int64_t> dist(0, size - 1);
  std::vector<std::int64_t> rows(static_cast<std::size_t>(n));
  for (auto& r : rows) r = dist(rng);
  return rows;
}

Batch sample_batch(std::span<const int> eligible, std::span<const std::int64_t> buffer_sizes, const BatchSpec& spec,
                   Rng& rng) {
  spec.validate();
  if (static_cast<int>(eligible.size()) < spec.scenes_per_batch) {
    throw PreconditionError("sample_batch: " + std::to_string(eligible.size()) + " eligible scenes, need " +
                            std::to_string(spec.scenes_per_batch));
  }
  std::vector<int> pool(eligible.begin(), eligible.end());
  Batch b;
  for (int i = 0; i < spec.scenes_per_batch; ++i) {
    const auto j = static_cast<std::size_t>(uniform_int(rng, i, static_cast<std::int64_t>(pool.size()) - 1));
    std::swap(pool[i], pool[j]);
    const int slot = pool[i];
    if (slot < 0 || static_cast<std::size_t>(slot) >= buffer_sizes.size()) {
      throw PreconditionError("sample_batch: slot out of range");
    }
    b.groups.push_back({slot, sample_rows(buffer_sizes[slot], spec.patches_per_scene, rng)});
  }
  return b;
}

}  // namespace aceg::buf
