#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "aceg/geometry/camera.hpp"

namespace aceg::geo {

struct Correspondence2D3D {
  Vec2 pixel = Vec2::Zero();
  Vec3 point = Vec3::Zero();
  double sigma = 0.0;  // optional; 0 means absent
};

/// Linear 6+ point DLT. Both point sets are Hartley-normalized, the 3x4
/// projection is taken from the SVD null vector, and its left 3x3 block is
/// projected to the nearest rotation. Throws DegenerateError when the
/// system has no unique solution (collinear or coplanar points, < 6 points).
PoseSE3 pnp_minimal(std::span<const Correspondence2D3D> corrs, const Intrinsics& K);

struct RefineOptions {
  int max_iters = 20;
  double initial_lambda = 1e-3;
};

struct RefineResult {
  PoseSE3 pose;
  double initial_cost = 0.0;  // sum of squared pixel residuals
  double final_cost = 0.0;
  int iterations = 0;
  int accepted_steps = 0;
};

/// Levenberg-Marquardt on the summed squared reprojection error. The update
/// is a left-multiplied axis-angle rotation plus a translation increment of
/// the camera-from-world transform; a step is accepted only if it lowers the
/// cost, so the cost never increases.
RefineResult refine_pose_report(const PoseSE3& pose0, std::span<const Correspondence2D3D> corrs,
                                const Intrinsics& K, const RefineOptions& opts = {});

PoseSE3 refine_pose(const PoseSE3& pose0, std::span<const Correspondence2D3D> corrs, const Intrinsics& K,
                    int iters = 20);

/// Squared pixel reprojection error summed over `corrs`.
double reprojection_cost(const PoseSE3& pose, std::span<const Correspondence2D3D> corrs, const Intrinsics& K);

struct RansacConfig {
  double inlier_thresh_px = 10.0;
  int max_iters = 1024;
  double confidence = 0.999;  // early exit once this many hypotheses suffice
  int refine_iters = 20;
  std::uint64_t seed = 0;
};

struct RansacResult {
  PoseSE3 pose;
  std::vector<std::uint8_t> inliers;  // one flag per input correspondence
  int inlier_count = 0;
  int hypotheses = 0;
};

/// Pixel reprojection error, infinite for points at or behind the near plane.
double reprojection_error(const PoseSE3& pose, const Correspondence2D3D& c, const Intrinsics& K);

/// Hypothesize-and-verify over 6-point DLT samples. The best hypothesis is
/// the one with most inliers; ties keep the earliest. The winner is refined
/// on its inliers and the mask recomputed. Returns nullopt when there are
/// fewer than 6 correspondences or no hypothesis reaches 6 inliers.
std::optional<RansacResult> ransac_pnp(std::span<const Correspondence2D3D> corrs, const Intrinsics& K,
                                       const RansacConfig& cfg);

}  // namespace aceg::geo
