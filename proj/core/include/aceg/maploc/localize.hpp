#pragma once

#include <optional>
#include <vector>

#include "aceg/geometry/pnp.hpp"
#include "aceg/regressor/model.hpp"
#include "aceg/synthworld/render.hpp"

namespace aceg::maploc {

struct ScenePrediction {
  Eigen::Vector2d pixel = Eigen::Vector2d::Zero();
  Eigen::Vector3d y = Eigen::Vector3d::Zero();
  double sigma = 1.0;
};

/// One forward pass over all observations of a view.
template <typename T>
std::vector<ScenePrediction> predict_scene_coords(reg::Regressor<T>& model, const ad::Matrix<T>& code,
                                                  const std::vector<world::PatchObservation>& observations);

inline constexpr int kMinCorrespondences = 6;

struct PrefilterResult {
  std::vector<std::size_t> kept;  // input indices, ascending
  double quantile = 0.0;          // Q_p
  double threshold = 0.0;         // f * Q_p
  bool fallback = false;          // padded to the kMinCorrespondences lowest
};

/// Keeps sigma < f * Q_p where Q_p is the ceil(p n)-th smallest sigma.
/// Falls back to the lowest-sigma records when fewer than 6 survive.
PrefilterResult prefilter(const std::vector<ScenePrediction>& preds, double p = 0.1, double f = 2.0);

struct LocalizeConfig {
  bool use_prefilter = true;
  double p = 0.1;
  double f = 2.0;
  geo::RansacConfig ransac;
};

struct LocalizeResult {
  int frame = -1;
  bool success = false;
  geo::PoseSE3 pose;
  int inliers = 0;
  int correspondences = 0;  // before the filter
  int filtered = 0;         // after the filter
  bool has_gt = false;
  geo::PoseError error;
};

LocalizeResult localize(reg::Regressor<float>& model, const ad::Matrix<float>& code, const world::ViewRender& view,
                        const LocalizeConfig& cfg);

/// Same, plus pose errors against the frame's own ground truth.
LocalizeResult localize_with_gt(reg::Regressor<float>& model, const ad::Matrix<float>& code,
                                const world::ViewRender& view, const LocalizeConfig& cfg);

}  // namespace aceg::maploc
