#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "aceg/geometry/camera.hpp"

namespace aceg::world {

struct SceneConfig {
  int num_points = 512;
  int latent_dim = 16;  // k
  Eigen::Vector3d box_min{-2.0, -2.0, -1.5};
  Eigen::Vector3d box_max{2.0, 2.0, 1.5};

  void validate() const;
};

/// Point set with one unit-norm appearance latent per point.
struct Scene {
  std::string id;
  std::uint64_t seed = 0;
  Eigen::Vector3d box_min = Eigen::Vector3d::Zero();
  Eigen::Vector3d box_max = Eigen::Vector3d::Zero();
  Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> points;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> latents;

  int size() const { return static_cast<int>(points.rows()); }
  Eigen::Vector3d centroid() const { return points.colwise().mean().transpose(); }
  Eigen::Vector3d box_center() const { return 0.5 * (box_min + box_max); }
};

Scene gen_scene(const SceneConfig& cfg, std::uint64_t seed, std::string id = {});

/// Intrinsics plus world-from-camera pose and image size.
struct CameraFrame {
  int index = 0;
  geo::Intrinsics K;
  geo::PoseSE3 T_wc;
  int width = 256;
  int height = 256;

  bool in_image(const Eigen::Vector2d& px) const {
    return px.x() >= 0.0 && px.x() < width && px.y() >= 0.0 && px.y() < height;
  }
};

/// Orbit around the scene centre with smoothly varying radius and height and
/// jittered look-at targets.
struct TrajectoryConfig {
  geo::Intrinsics K{128.0, 128.0, 128.0, 128.0};
  int width = 256;
  int height = 256;
  double radius = 5.0;
  double radius_wobble = 0.3;
  double radius_jitter = 0.02;
  double step_rad = 0.08;  // azimuth advance per frame
  double height_mean = 1.5;
  double height_wobble = 0.3;
  double target_jitter = 0.2;
  int min_visible = 32;
  int max_attempts = 16;

  void validate() const;
};

/// Camera looking from `center` toward `target` with world +z as up.
geo::PoseSE3 look_at(const Eigen::Vector3d& center, const Eigen::Vector3d& target);

/// Points of `scene` that project inside the image in front of the near plane.
std::vector<int> visible_points(const Scene& scene, const CameraFrame& frame);

/// Throws PreconditionError if some frame keeps seeing fewer than
/// min_visible points after max_attempts re-draws.
std::vector<CameraFrame> gen_trajectory(const Scene& scene, int n_frames, std::uint64_t seed,
                                        const TrajectoryConfig& cfg = {});

}  // namespace aceg::world
