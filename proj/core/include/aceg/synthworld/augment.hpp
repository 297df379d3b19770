#pragma once

#include <cstdint>
#include <vector>

#include "aceg/common/random.hpp"
#include "aceg/synthworld/scene.hpp"

namespace aceg::world {

/// A scene together with the cameras that observe it.
struct SceneInstance {
  Scene scene;
  std::vector<CameraFrame> frames;
};

struct AugmentConfig {
  bool rotate = true;
  bool mirror = false;  // flip the world x axis with probability 1/2
};

/// Uniform rotation on SO(3): QR of a Gaussian matrix with the sign of R's
/// diagonal fixed and det forced to +1.
Eigen::Matrix3d random_rotation(Rng& rng);
Eigen::Matrix3d random_rotation(std::uint64_t seed);

/// Applies one rigid rotation to points and poses together, so pixel
/// projections are unchanged. Mirroring maps x -> -x in the world and
/// conjugates each camera by the same flip (R' = M R M, t' = M t), which
/// keeps rotations proper and mirrors the image horizontally: a point that
/// projected to u now projects to 2*cx - u.
SceneInstance apply_augment(const SceneInstance& in, const AugmentConfig& cfg, std::uint64_t seed);

}  // namespace aceg::world
