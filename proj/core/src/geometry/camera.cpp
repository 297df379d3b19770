#include "aceg/geometry/camera.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/SVD>

#include "aceg/common/error.hpp"

namespace aceg::geo {

void Intrinsics::validate() const {
  if (!(fx > 0.0 && fy > 0.0)) throw PreconditionError("intrinsics: focal lengths must be positive");
  if (!std::isfinite(cx) || !std::isfinite(cy)) throw PreconditionError("intrinsics: non-finite principal point");
}

double PoseSE3::orthonormality_error() const {
  const double ortho = (R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff();
  return std::max(ortho, std::abs(R.determinant() - 1.0));
}

Projection project(const Intrinsics& K, const PoseSE3& T_wc, const Vec3& y_world, double z_min) {
  const Vec3 c = T_wc.to_camera(y_world);
  Projection p;
  p.z = c.z();
  p.valid = c.z() > z_min;
  // Still produce a pixel for near/behind points so callers can inspect it;
  // depth is clamped only to keep the division finite.
  const double z = std::abs(c.z()) > 1e-12 ? c.z() : 1e-12;
  p.pixel = {K.fx * c.x() / z + K.cx, K.fy * c.y() / z + K.cy};
  return p;
}

Vec3 backproject(const Intrinsics& K, const PoseSE3& T_wc, const Vec2& pixel, double z) {
  const Vec3 c((pixel.x() - K.cx) / K.fx * z, (pixel.y() - K.cy) / K.fy * z, z);
  return T_wc.to_world(c);
}

Vec3 pixel_ray(const Intrinsics& K, const Vec2& pixel) {
  return Vec3((pixel.x() - K.cx) / K.fx, (pixel.y() - K.cy) / K.fy, 1.0).normalized();
}

double rotation_angle_deg(const Mat3& R) {
  const double c = std::clamp((R.trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c) * 180.0 / std::numbers::pi;
}

PoseError pose_error(const PoseSE3& est, const PoseSE3& gt) {
  return {(est.t - gt.t).norm(), rotation_angle_deg(gt.R.transpose() * est.R)};
}

Mat3 so3_exp(const Vec3& w) {
  const double theta = w.norm();
  Mat3 W;
  W << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
  if (theta < 1e-8) return Mat3::Identity() + W + 0.5 * W * W;
  return Mat3::Identity() + std::sin(theta) / theta * W + (1.0 - std::cos(theta)) / (theta * theta) * W * W;
}

Mat3 nearest_rotation(const Mat3& M) {
  Eigen::JacobiSVD<Mat3> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 D = Mat3::Identity();
  D(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0 ? -1.0 : 1.0;
  return svd.matrixU() * D * svd.matrixV().transpose();
}

}  // namespace aceg::geo
