#include "aceg/geometry/pnp.hpp"

#include <cmath>

#include <Eigen/SVD>

#include "aceg/common/error.hpp"

namespace aceg::geo {

namespace {

// Similarity that moves the centroid to the origin and scales the mean
// distance to sqrt(dim).
template <int Dim>
Eigen::Matrix<double, Dim + 1, Dim + 1> normalizer(const std::vector<Eigen::Matrix<double, Dim, 1>>& pts) {
  Eigen::Matrix<double, Dim, 1> c = Eigen::Matrix<double, Dim, 1>::Zero();
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  double mean_dist = 0.0;
  for (const auto& p : pts) mean_dist += (p - c).norm();
  mean_dist /= static_cast<double>(pts.size());
  if (!(mean_dist > 1e-12)) throw DegenerateError("pnp: all points coincide");
  const double s = std::sqrt(static_cast<double>(Dim)) / mean_dist;
  Eigen::Matrix<double, Dim + 1, Dim + 1> T = Eigen::Matrix<double, Dim + 1, Dim + 1>::Identity();
  T.template topLeftCorner<Dim, Dim>() *= s;
  T.template topRightCorner<Dim, 1>() = -s * c;
  return T;
}

}  // namespace

PoseSE3 pnp_minimal(std::span<const Correspondence2D3D> corrs, const Intrinsics& K) {
  K.validate();
  const auto n = static_cast<int>(corrs.size());
  if (n < 6) throw DegenerateError("pnp: need at least 6 correspondences");

  std::vector<Vec2> xs(n);
  std::vector<Vec3> Xs(n);
  for (int i = 0; i < n; ++i) {
    // normalized image coordinates, so the estimate is [R | t] up to scale
    xs[i] = {(corrs[i].pixel.x() - K.cx) / K.fx, (corrs[i].pixel.y() - K.cy) / K.fy};
    Xs[i] = corrs[i].point;
  }
  const Eigen::Matrix3d T2 = normalizer<2>(xs);
  const Eigen::Matrix4d T3 = normalizer<3>(Xs);

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * n, 12);
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector4d X = T3 * Xs[i].homogeneous();
    const Eigen::Vector3d x = T2 * xs[i].homogeneous();
    const double u = x.x() / x.z(), v = x.y() / x.z();
    A.block<1, 4>(2 * i, 0) = X.transpose();
    A.block<1, 4>(2 * i, 8) = -u * X.transpose();
    A.block<1, 4>(2 * i + 1, 4) = X.transpose();
    A.block<1, 4>(2 * i + 1, 8) = -v * X.transpose();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // A unique solution needs a one-dimensional null space: the second
  // smallest singular value must be well away from zero.
  if (!(sv(10) > 1e-8 * sv(0))) throw DegenerateError("pnp: rank-deficient DLT system");

  const Eigen::VectorXd p = svd.matrixV().col(11);
  Eigen::Matrix<double, 3, 4> Pn;
  Pn << p.segment<4>(0).transpose(), p.segment<4>(4).transpose(), p.segment<4>(8).transpose();
  Eigen::Matrix<double, 3, 4> P = T2.inverse() * Pn * T3;

  Mat3 M = P.leftCols<3>();
  if (M.determinant() < 0) {
    P = -P;
    M = -M;
  }
  Eigen::JacobiSVD<Mat3> msvd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double scale = msvd.singularValues().mean();
  if (!(scale > 0.0) || !std::isfinite(scale)) throw DegenerateError("pnp: degenerate projection matrix");
  const Mat3 R_cw = msvd.matrixU() * msvd.matrixV().transpose();
  const Vec3 t_cw = P.col(3) / scale;

  PoseSE3 T_wc;
  T_wc.R = R_cw.transpose();
  T_wc.t = -R_cw.transpose() * t_cw;
  if (!T_wc.R.allFinite() || !T_wc.t.allFinite()) throw DegenerateError("pnp: non-finite pose");
  return T_wc;
}

}  // namespace aceg::geo
