#pragma once

#include <cstdint>
#include <vector>

#include "aceg/synthworld/feature_oracle.hpp"
#include "aceg/synthworld/scene.hpp"

namespace aceg::world {

/// One visible point as seen by a view.
struct PatchObservation {
  int point_id = -1;
  Eigen::Vector2d pixel = Eigen::Vector2d::Zero();
  Eigen::Vector3d point = Eigen::Vector3d::Zero();  // ground truth y
  Eigen::VectorXf embedding;
};

struct ViewRender {
  CameraFrame frame;
  double condition = 0.0;
  std::vector<PatchObservation> observations;
};

/// Projects every point, keeps those in front of the near plane and inside
/// the image, and embeds each with the oracle. The view direction handed to
/// the oracle is the viewing ray in camera coordinates, so embeddings depend
/// only on what the image shows and not on the choice of world frame.
/// Noise is drawn from a stream derived from `seed` alone.
ViewRender render_view(const Scene& scene, const CameraFrame& frame, const FeatureOracle& oracle, double condition,
                       std::uint64_t seed);

}  // namespace aceg::world
