#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "aceg/common/error.hpp"
#include "aceg/geometry/pnp.hpp"

namespace aceg::geo {

namespace {

// Camera-from-world parameters, the natural frame for the residuals.
struct CamPose {
  Mat3 R;
  Vec3 t;
};

CamPose to_cam(const PoseSE3& T_wc) { return {T_wc.R.transpose(), -T_wc.R.transpose() * T_wc.t}; }
PoseSE3 to_world(const CamPose& c) { return {c.R.transpose(), -c.R.transpose() * c.t}; }

double cost_of(const CamPose& P, std::span<const Correspondence2D3D> corrs, const Intrinsics& K) {
  double cost = 0.0;
  for (const auto& c : corrs) {
    const Vec3 p = P.R * c.point + P.t;
    const Vec2 px(K.fx * p.x() / p.z() + K.cx, K.fy * p.y() / p.z() + K.cy);
    cost += (px - c.pixel).squaredNorm();
  }
  return cost;
}

Mat3 hat(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

}  // namespace

double reprojection_cost(const PoseSE3& pose, std::span<const Correspondence2D3D> corrs, const Intrinsics& K) {
  return cost_of(to_cam(pose), corrs, K);
}

RefineResult refine_pose_report(const PoseSE3& pose0, std::span<const Correspondence2D3D> corrs,
                                const Intrinsics& K, const RefineOptions& opts) {
  if (!pose0.R.allFinite() || !pose0.t.allFinite()) throw PreconditionError("refine_pose: non-finite initial pose");
  CamPose P = to_cam(pose0);
  double cost = cost_of(P, corrs, K);
  if (!std::isfinite(cost)) throw NonFiniteError("refine_pose: non-finite initial cost");

  RefineResult out;
  out.initial_cost = cost;
  double lambda = opts.initial_lambda;
  using Mat6 = Eigen::Matrix<double, 6, 6>;
  using Vec6 = Eigen::Matrix<double, 6, 1>;

  for (int it = 0; it < opts.max_iters && cost > 0.0; ++it) {
    ++out.iterations;
    Mat6 H = Mat6::Zero();
    Vec6 b = Vec6::Zero();
    for (const auto& c : corrs) {
      const Vec3 RX = P.R * c.point;
      const Vec3 p = RX + P.t;
      const double iz = 1.0 / p.z();
      const Vec2 r(K.fx * p.x() * iz + K.cx - c.pixel.x(), K.fy * p.y() * iz + K.cy - c.pixel.y());
      Eigen::Matrix<double, 2, 3> dpi;
      dpi << K.fx * iz, 0, -K.fx * p.x() * iz * iz, 0, K.fy * iz, -K.fy * p.y() * iz * iz;
      Eigen::Matrix<double, 3, 6> dp;
      dp.leftCols<3>() = -hat(RX);  // d(exp(w) R X)/dw at w = 0
      dp.rightCols<3>() = Mat3::Identity();
      const Eigen::Matrix<double, 2, 6> J = dpi * dp;
      H.noalias() += J.transpose() * J;
      b.noalias() += J.transpose() * r;
    }
    if (!H.allFinite() || !b.allFinite()) throw NonFiniteError("refine_pose: non-finite normal equations");

    bool accepted = false;
    for (int attempt = 0; attempt < 10 && !accepted; ++attempt) {
      Mat6 A = H;
      A.diagonal() += lambda * H.diagonal().cwiseMax(1e-12);
      const Vec6 delta = A.ldlt().solve(-b);
      if (!delta.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      CamPose cand{so3_exp(delta.head<3>()) * P.R, P.t + delta.tail<3>()};
      const double c2 = cost_of(cand, corrs, K);
      if (std::isfinite(c2) && c2 < cost) {
        const double gain = cost - c2;
        P = cand;
        cost = c2;
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        ++out.accepted_steps;
        if (gain <= 1e-14 * (cost + 1e-300) || delta.norm() < 1e-15) it = opts.max_iters;
      } else {
        lambda *= 10.0;
      }
    }
    if (!accepted) break;
  }
  // Re-orthonormalize against drift from repeated exp() products.
  P.R = nearest_rotation(P.R);
  out.pose = to_world(P);
  out.final_cost = reprojection_cost(out.pose, corrs, K);
  if (out.final_cost > out.initial_cost) {
    // numerical noise from the projection round trip; keep the start
    out.pose = pose0;
    out.final_cost = out.initial_cost;
  }
  return out;
}

PoseSE3 refine_pose(const PoseSE3& pose0, std::span<const Correspondence2D3D> corrs, const Intrinsics& K, int iters) {
  RefineOptions opts;
  opts.max_iters = iters;
  return refine_pose_report(pose0, corrs, K, opts).pose;
}

}  // namespace aceg::geo
