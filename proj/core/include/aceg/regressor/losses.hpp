#pragma once

#include <vector>

#include "aceg/autodiff/graph.hpp"
#include "aceg/geometry/camera.hpp"
#include "aceg/regressor/model.hpp"

namespace aceg::reg {

/// Reprojection error above which a prediction is treated as invalid.
inline constexpr double kMaxReprojError = 1000.0;

/// log sigma + sqrt(2) * ||y - y_gt|| / sigma.
double laplace_nll_3d(const CoordPrediction& pred, const Eigen::Vector3d& y_gt);

/// Same form in pixel space.
double laplace_nll_2d(const Eigen::Vector2d& x_pred, double sigma_x, const Eigen::Vector2d& x_gt);

struct ProjectedPrediction {
  Eigen::Vector2d pixel = Eigen::Vector2d::Zero();
  double sigma_x = 1.0;
  double z = 0.0;
  bool valid = false;
};

/// Projects y and propagates sigma to first order:
/// sigma_x = sigma_y * f_avg / max(z, z_min). Valid iff z > z_min and the
/// pixel lies within e_max of `x_gt`.
ProjectedPrediction project_prediction(const CoordPrediction& pred, const geo::Intrinsics& K,
                                       const geo::PoseSE3& T_wc, const Eigen::Vector2d& x_gt,
                                       double z_min = geo::kZMin, double e_max = kMaxReprojError);

/// Constant-depth target T_wc(d0 * ray), scored with the 3D Laplace NLL.
Eigen::Vector3d depth_prior_target(const Eigen::Vector3d& ray_cam, const geo::PoseSE3& T_wc, double d0);
double depth_prior_loss(const CoordPrediction& pred, const Eigen::Vector3d& ray_cam, const geo::PoseSE3& T_wc,
                        double d0);

/// Per-row 3D Laplace NLL on raw regressor outputs (n x 4) against n x 3
/// targets. Returns an n x 1 node.
template <typename T>
ad::Var laplace_nll_3d_rows(ad::Graph<T>& g, ad::Var out, const ad::Matrix<T>& targets);

/// Supervision for one record of a posed novel-scene buffer.
struct ReprojRecord {
  geo::Intrinsics K;
  geo::PoseSE3 T_wc;
  Eigen::Vector2d pixel = Eigen::Vector2d::Zero();
  Eigen::Vector3d depth_target = Eigen::Vector3d::Zero();  // fallback target
};

struct ReprojStats {
  int valid = 0;
  int invalid = 0;
};

/// Per-row novel-scene objective: 2D Laplace NLL of the reprojection where
/// the prediction is valid, 3D Laplace NLL against the depth-prior target
/// otherwise. Validity is decided from forward values and is not
/// differentiated through.
template <typename T>
ad::Var reprojection_nll_rows(ad::Graph<T>& g, ad::Var out, const std::vector<ReprojRecord>& records,
                              ReprojStats* stats = nullptr, double z_min = geo::kZMin,
                              double e_max = kMaxReprojError);

}  // namespace aceg::reg
