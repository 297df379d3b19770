#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "aceg/autodiff/tensor.hpp"
#include "aceg/synthworld/tuple.hpp"

namespace aceg::buf {

inline constexpr std::int64_t kPretrainCap = 50'000;
inline constexpr std::int64_t kNovelCap = 200'000;

enum class BufferRole : std::uint8_t { Mapping = 0, Query = 1 };

std::string to_string(BufferRole r);

/// Shuffled (embedding, ground-truth point) records of one split half.
struct PretrainBuffer {
  std::string scene_id;
  BufferRole role = BufferRole::Mapping;
  std::uint64_t seed = 0;
  ad::Matrix<float> embeddings;      // n x D_feat
  ad::Matrix<float> points;          // n x 3
  std::vector<std::int32_t> frames;  // source frame index per record

  std::int64_t size() const { return embeddings.rows(); }
};

/// Shuffled (embedding, pixel, camera) records for mapping a new scene.
/// Cameras are stored once in `cameras`; `camera_index` points into it.
struct NovelSceneBuffer {
  std::string scene_id;
  std::uint64_t seed = 0;
  double depth_prior = 2.0;  // d0 for the constant-depth fallback
  std::vector<world::CameraFrame> cameras;
  ad::Matrix<float> embeddings;  // n x D_feat
  ad::Matrix<double> pixels;     // n x 2
  std::vector<std::int32_t> camera_index;

  std::int64_t size() const { return embeddings.rows(); }
};

/// Flattens all observations, shuffles them with `seed` and keeps the first
/// min(n, cap), i.e. a uniform subsample. Throws on empty input.
PretrainBuffer build_pretrain_buffer(const std::string& scene_id, const std::vector<world::ViewRender>& views,
                                     BufferRole role, std::int64_t cap, std::uint64_t seed);

/// Mapping buffer M from the mapping renders and query buffer Q from the
/// query renders, with independent shuffle streams.
std::pair<PretrainBuffer, PretrainBuffer> build_pretrain_buffers(const world::SceneTuple& tuple,
                                                                 std::int64_t cap = kPretrainCap,
                                                                 std::uint64_t seed = 0);

/// Default d0 when the caller has no scene estimate.
inline constexpr double kDefaultDepthPrior = 2.0;

NovelSceneBuffer build_novel_buffer(const std::string& scene_id, const std::vector<world::ViewRender>& views,
                                    std::int64_t cap, std::uint64_t seed, double depth_prior = kDefaultDepthPrior);

}  // namespace aceg::buf
