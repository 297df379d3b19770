#include "aceg/regressor/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace aceg::reg {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

struct ClampedLogSigma {
  double s;
  bool active;  // gradient passes through the clamp
};

ClampedLogSigma clamp_log_sigma(double raw) {
  return {std::clamp(raw, -kLogSigmaBound, kLogSigmaBound), raw > -kLogSigmaBound && raw < kLogSigmaBound};
}

}  // namespace

double laplace_nll_3d(const CoordPrediction& pred, const Eigen::Vector3d& y_gt) {
  return std::log(pred.sigma) + kSqrt2 * (pred.y - y_gt).norm() / pred.sigma;
}

double laplace_nll_2d(const Eigen::Vector2d& x_pred, double sigma_x, const Eigen::Vector2d& x_gt) {
  return std::log(sigma_x) + kSqrt2 * (x_pred - x_gt).norm() / sigma_x;
}

ProjectedPrediction project_prediction(const CoordPrediction& pred, const geo::Intrinsics& K,
                                       const geo::PoseSE3& T_wc, const Eigen::Vector2d& x_gt, double z_min,
                                       double e_max) {
  const auto proj = geo::project(K, T_wc, pred.y, z_min);
  ProjectedPrediction out;
  out.pixel = proj.pixel;
  out.z = proj.z;
  out.sigma_x = pred.sigma * K.f_avg() / std::max(proj.z, z_min);
  out.valid = proj.valid && (proj.pixel - x_gt).norm() <= e_max;
  return out;
}

Eigen::Vector3d depth_prior_target(const Eigen::Vector3d& ray_cam, const geo::PoseSE3& T_wc, double d0) {
  if (!(d0 > 0.0)) throw PreconditionError("depth prior needs d0 > 0");
  return T_wc.to_world(d0 * ray_cam);
}

double depth_prior_loss(const CoordPrediction& pred, const Eigen::Vector3d& ray_cam, const geo::PoseSE3& T_wc,
                        double d0) {
  return laplace_nll_3d(pred, depth_prior_target(ray_cam, T_wc, d0));
}

template <typename T>
ad::Var laplace_nll_3d_rows(ad::Graph<T>& g, ad::Var out, const ad::Matrix<T>& targets) {
  const auto& O = g.value(out);
  if (O.cols() != 4 || targets.cols() != 3 || targets.rows() != O.rows()) {
    throw ShapeError("laplace_nll_3d_rows: outputs must be n x 4 and targets n x 3");
  }
  const auto n = O.rows();
  ad::Matrix<T> loss(n, 1);
  ad::Matrix<T> dout(n, 4);  // d loss_r / d out_r, cached for backward
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto [s, active] = clamp_log_sigma(static_cast<double>(O(r, 3)));
    const Eigen::Vector3d d(static_cast<double>(O(r, 0) - targets(r, 0)), static_cast<double>(O(r, 1) - targets(r, 1)),
                            static_cast<double>(O(r, 2) - targets(r, 2)));
    const double res = d.norm();
    const double inv_sigma = std::exp(-s);
    loss(r, 0) = static_cast<T>(s + kSqrt2 * res * inv_sigma);
    const Eigen::Vector3d dy = res > 0.0 ? Eigen::Vector3d(kSqrt2 * inv_sigma * d / res) : Eigen::Vector3d::Zero();
    dout(r, 0) = static_cast<T>(dy.x());
    dout(r, 1) = static_cast<T>(dy.y());
    dout(r, 2) = static_cast<T>(dy.z());
    dout(r, 3) = active ? static_cast<T>(1.0 - kSqrt2 * res * inv_sigma) : T(0);
  }
  return g.custom(std::move(loss), {out},
                  [dout = std::move(dout)](const ad::Matrix<T>& grad, std::span<ad::Matrix<T>* const> in) {
                    if (in[0]) *in[0] += (dout.array().colwise() * grad.col(0).array()).matrix();
                  },
                  "laplace_nll_3d_rows");
}

template <typename T>
ad::Var reprojection_nll_rows(ad::Graph<T>& g, ad::Var out, const std::vector<ReprojRecord>& records,
                              ReprojStats* stats, double z_min, double e_max) {
  const auto& O = g.value(out);
  if (O.cols() != 4 || O.rows() != static_cast<Eigen::Index>(records.size())) {
    throw ShapeError("reprojection_nll_rows: outputs must be n x 4 with one record per row");
  }
  const auto n = O.rows();
  ad::Matrix<T> loss(n, 1);
  ad::Matrix<T> dout(n, 4);
  ReprojStats st;
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& rec = records[static_cast<std::size_t>(r)];
    const auto [s, active] = clamp_log_sigma(static_cast<double>(O(r, 3)));
    const Eigen::Vector3d y(O(r, 0), O(r, 1), O(r, 2));
    const Eigen::Vector3d yc = rec.T_wc.to_camera(y);
    const double z = yc.z();
    double l = 0.0;
    Eigen::Vector3d dy = Eigen::Vector3d::Zero();
    double ds = 0.0;
    bool valid = z > z_min;
    double du = 0.0, dv = 0.0, e = 0.0;
    if (valid) {
      du = rec.K.fx * yc.x() / z + rec.K.cx - rec.pixel.x();
      dv = rec.K.fy * yc.y() / z + rec.K.cy - rec.pixel.y();
      e = std::hypot(du, dv);
      valid = e <= e_max;
    }
    if (valid) {
      const double f = rec.K.f_avg();
      const double k = kSqrt2 * std::exp(-s) / f;
      l = s + std::log(f) - std::log(z) + k * e * z;
      ds = 1.0 - k * e * z;
      Eigen::Vector3d dyc = Eigen::Vector3d::Zero();
      if (e > 0.0) {
        dyc.x() = k * du * rec.K.fx / e;
        dyc.y() = k * dv * rec.K.fy / e;
        dyc.z() = -1.0 / z + k * e +
                  k * z * (du / e * (-rec.K.fx * yc.x() / (z * z)) + dv / e * (-rec.K.fy * yc.y() / (z * z)));
      } else {
        dyc.z() = -1.0 / z;
      }
      dy = rec.T_wc.R * dyc;
      ++st.valid;
    } else {
      const Eigen::Vector3d d = y - rec.depth_target;
      const double res = d.norm();
      const double inv_sigma = std::exp(-s);
      l = s + kSqrt2 * res * inv_sigma;
      ds = 1.0 - kSqrt2 * res * inv_sigma;
      if (res > 0.0) dy = kSqrt2 * inv_sigma * d / res;
      ++st.invalid;
    }
    loss(r, 0) = static_cast<T>(l);
    dout(r, 0) = static_cast<T>(dy.x());
    dout(r, 1) = static_cast<T>(dy.y());
    dout(r, 2) = static_cast<T>(dy.z());
    dout(r, 3) = active ? static_cast<T>(ds) : T(0);
  }
  if (stats != nullptr) *stats = st;
  return g.custom(std::move(loss), {out},
                  [dout = std::move(dout)](const ad::Matrix<T>& grad, std::span<ad::Matrix<T>* const> in) {
                    if (in[0]) *in[0] += (dout.array().colwise() * grad.col(0).array()).matrix();
                  },
                  "reprojection_nll_rows");
}

template ad::Var laplace_nll_3d_rows<float>(ad::Graph<float>&, ad::Var, const ad::Matrix<float>&);
template ad::Var laplace_nll_3d_rows<double>(ad::Graph<double>&, ad::Var, const ad::Matrix<double>&);
template ad::Var reprojection_nll_rows<float>(ad::Graph<float>&, ad::Var, const std::vector<ReprojRecord>&,
                                              ReprojStats*, double, double);
template ad::Var reprojection_nll_rows<double>(ad::Graph<double>&, ad::Var, const std::vector<ReprojRecord>&,
                                               ReprojStats*, double, double);

}  // namespace aceg::reg
