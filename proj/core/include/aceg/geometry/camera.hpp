#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace aceg::geo {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Default near-plane: points with camera depth at or below this are invalid.
inline constexpr double kZMin = 0.1;

/// Pinhole intrinsics in pixels.
struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  double f_avg() const { return 0.5 * (fx + fy); }
  void validate() const;
};

/// World-from-camera rigid transform: y_world = R * y_cam + t.
/// t is therefore the camera center in world coordinates.
struct PoseSE3 {
  Mat3 R = Mat3::Identity();
  Vec3 t = Vec3::Zero();

  Vec3 to_camera(const Vec3& y_world) const { return R.transpose() * (y_world - t); }
  Vec3 to_world(const Vec3& y_cam) const { return R * y_cam + t; }
  PoseSE3 inverse() const { return {R.transpose(), -R.transpose() * t}; }
  /// Max deviation of R^T R from identity and of det R from 1.
  double orthonormality_error() const;
};

struct Projection {
  Vec2 pixel = Vec2::Zero();
  double z = 0.0;
  bool valid = false;  // z > z_min
};

Projection project(const Intrinsics& K, const PoseSE3& T_wc, const Vec3& y_world, double z_min = kZMin);

/// World point at camera depth z along the ray through `pixel`.
Vec3 backproject(const Intrinsics& K, const PoseSE3& T_wc, const Vec2& pixel, double z);

/// Unit-length camera-frame ray through `pixel`.
Vec3 pixel_ray(const Intrinsics& K, const Vec2& pixel);

struct PoseError {
  double translation = 0.0;  // scene units
  double rotation_deg = 0.0;
};

/// ||t_est - t_gt|| and the angle of R_gt^T R_est.
PoseError pose_error(const PoseSE3& est, const PoseSE3& gt);

/// Rotation angle in degrees from the trace formula, argument clamped.
double rotation_angle_deg(const Mat3& R);

/// Rodrigues map from an axis-angle vector to SO(3).
Mat3 so3_exp(const Vec3& w);

/// Closest rotation in the Frobenius sense (polar factor with det +1).
Mat3 nearest_rotation(const Mat3& M);

}  // namespace aceg::geo
