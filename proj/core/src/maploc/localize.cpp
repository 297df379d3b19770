#include "aceg/maploc/localize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "aceg/common/error.hpp"
#include "aceg/common/random.hpp"

namespace aceg::maploc {

template <typename T>
std::vector<ScenePrediction> predict_scene_coords(reg::Regressor<T>& model, const ad::Matrix<T>& code,
                                                  const std::vector<world::PatchObservation>& observations) {
  std::vector<ScenePrediction> out;
  if (observations.empty()) return out;
  const auto d = model.config().feat_dim;
  ad::Matrix<T> E(static_cast<Eigen::Index>(observations.size()), d);
  for (std::size_t i = 0; i < observations.size(); ++i) {
    if (observations[i].embedding.size() != d) throw ShapeError("predict_scene_coords: embedding width mismatch");
    E.row(static_cast<Eigen::Index>(i)) = observations[i].embedding.transpose().template cast<T>();
  }
  const auto preds = model.regress_batch(E, code);
  out.reserve(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) out.push_back({observations[i].pixel, preds[i].y, preds[i].sigma});
  return out;
}

template std::vector<ScenePrediction> predict_scene_coords<float>(reg::Regressor<float>&, const ad::Matrix<float>&,
                                                                 const std::vector<world::PatchObservation>&);
template std::vector<ScenePrediction> predict_scene_coords<double>(reg::Regressor<double>&, const ad::Matrix<double>&,
                                                                  const std::vector<world::PatchObservation>&);

PrefilterResult prefilter(const std::vector<ScenePrediction>& preds, double p, double f) {
  if (preds.empty()) throw PreconditionError("prefilter: no predictions");
  if (!(p > 0.0 && p < 1.0)) throw PreconditionError("prefilter: p must lie in (0, 1)");
  if (!(f > 0.0)) throw PreconditionError("prefilter: f must be positive");
  const auto n = preds.size();
  // order by sigma, ties by index, so the fallback is deterministic
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return preds[a].sigma < preds[b].sigma; });
  const auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
  PrefilterResult r;
  r.quantile = preds[order[std::max<std::size_t>(rank, 1) - 1]].sigma;
  r.threshold = f * r.quantile;
  for (std::size_t i = 0; i < n; ++i) {
    if (preds[i].sigma < r.threshold) r.kept.push_back(i);
  }
  const auto need = std::min<std::size_t>(kMinCorrespondences, n);
  if (r.kept.size() < need) {
    r.fallback = true;
    r.kept.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(need));
    std::sort(r.kept.begin(), r.kept.end());
  }
  return r;
}

LocalizeResult localize(reg::Regressor<float>& model, const ad::Matrix<float>& code, const world::ViewRender& view,
                        const LocalizeConfig& cfg) {
  if (view.observations.size() < static_cast<std::size_t>(kMinCorrespondences)) {
    throw PreconditionError("localize: need at least 6 observations, got " +
                            std::to_string(view.observations.size()));
  }
  LocalizeResult res;
  res.frame = view.frame.index;
  const auto preds = predict_scene_coords(model, code, view.observations);
  res.correspondences = static_cast<int>(preds.size());

  std::vector<std::size_t> kept(preds.size());
  std::iota(kept.begin(), kept.end(), std::size_t{0});
  if (cfg.use_prefilter) kept = prefilter(preds, cfg.p, cfg.f).kept;
  res.filtered = static_cast<int>(kept.size());

  std::vector<geo::Correspondence2D3D> corrs;
  corrs.reserve(kept.size());
  for (auto i : kept) {
    if (!preds[i].y.allFinite()) continue;
    corrs.push_back({preds[i].pixel, preds[i].y, preds[i].sigma});
  }
  auto rc = cfg.ransac;
  rc.seed = derive_seed(cfg.ransac.seed, {static_cast<std::uint64_t>(view.frame.index)});
  const auto sol = geo::ransac_pnp(corrs, view.frame.K, rc);
  if (sol) {
    res.success = true;
    res.pose = sol->pose;
    res.inliers = sol->inlier_count;
  }
  return res;
}

LocalizeResult localize_with_gt(reg::Regressor<float>& model, const ad::Matrix<float>& code,
                                const world::ViewRender& view, const LocalizeConfig& cfg) {
  auto res = localize(model, code, view, cfg);
  res.has_gt = true;
  if (res.success) res.error = geo::pose_error(res.pose, view.frame.T_wc);
  return res;
}

}  // namespace aceg::maploc
