#include "aceg/synthworld/augment.hpp"

#include <Eigen/QR>

#include "aceg/common/random.hpp"

namespace aceg::world {

Eigen::Matrix3d random_rotation(Rng& rng) {
  Eigen::Matrix3d A;
  for (int i = 0; i < 9; ++i) A.data()[i] = normal(rng);
  Eigen::HouseholderQR<Eigen::Matrix3d> qr(A);
  Eigen::Matrix3d Q = qr.householderQ();
  const Eigen::Matrix3d R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < 3; ++i) {
    if (R(i, i) < 0) Q.col(i) *= -1.0;
  }
  if (Q.determinant() < 0) Q.col(0) *= -1.0;
  return Q;
}

Eigen::Matrix3d random_rotation(std::uint64_t seed) {
  Rng rng(seed);
  return random_rotation(rng);
}

SceneInstance apply_augment(const SceneInstance& in, const AugmentConfig& cfg, std::uint64_t seed) {
  Rng rng = make_rng(seed, {0x6175676dULL});
  Eigen::Matrix3d A = Eigen::Matrix3d::Identity();
  if (cfg.rotate) A = random_rotation(rng);
  const bool flip = cfg.mirror && uniform_int(rng, 0, 1) == 1;
  const Eigen::Matrix3d M = flip ? Eigen::Vector3d(-1, 1, 1).asDiagonal().toDenseMatrix() : Eigen::Matrix3d::Identity();

  // World map y -> A M y; camera conjugated by M (identity without flip).
  const Eigen::Matrix3d W = A * M;
  SceneInstance out = in;
  out.scene.points = (in.scene.points * W.transpose()).eval();
  // The axis-aligned box of the moved scene.
  out.scene.box_min = out.scene.points.colwise().minCoeff().transpose();
  out.scene.box_max = out.scene.points.colwise().maxCoeff().transpose();
  for (auto& f : out.frames) {
    f.T_wc.R = W * f.T_wc.R * M;
    f.T_wc.t = W * f.T_wc.t;
  }
  return out;
}

}  // namespace aceg::world
