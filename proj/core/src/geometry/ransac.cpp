#include <algorithm>
#include <cmath>
#include <limits>

#include "aceg/common/error.hpp"
#include "aceg/common/random.hpp"
#include "aceg/geometry/pnp.hpp"

namespace aceg::geo {

namespace {

constexpr int kSampleSize = 6;

int count_inliers(const PoseSE3& pose, std::span<const Correspondence2D3D> corrs, const Intrinsics& K,
                  double thresh, std::vector<std::uint8_t>* mask) {
  int n = 0;
  if (mask != nullptr) mask->assign(corrs.size(), 0);
  for (std::size_t i = 0; i < corrs.size(); ++i) {
    if (reprojection_error(pose, corrs[i], K) < thresh) {
      ++n;
      if (mask != nullptr) (*mask)[i] = 1;
    }
  }
  return n;
}

// Hypotheses needed so that an all-inlier sample is drawn with the given
// confidence at the current inlier ratio.
int required_iterations(double inlier_ratio, double confidence, int cap) {
  if (inlier_ratio >= 1.0) return 1;
  const double p_good = std::pow(inlier_ratio, kSampleSize);
  if (p_good <= 0.0) return cap;
  const double n = std::log(1.0 - confidence) / std::log(1.0 - p_good);
  if (!std::isfinite(n) || n >= cap) return cap;
  return std::max(1, static_cast<int>(std::ceil(n)));
}

}  // namespace

double reprojection_error(const PoseSE3& pose, const Correspondence2D3D& c, const Intrinsics& K) {
  const auto p = project(K, pose, c.point);
  if (!p.valid) return std::numeric_limits<double>::infinity();
  return (p.pixel - c.pixel).norm();
}

std::optional<RansacResult> ransac_pnp(std::span<const Correspondence2D3D> corrs, const Intrinsics& K,
                                       const RansacConfig& cfg) {
  if (!(cfg.inlier_thresh_px > 0.0) || cfg.max_iters < 1) throw ConfigError("ransac: bad threshold or iteration cap");
  const auto n = static_cast<int>(corrs.size());
  if (n < kSampleSize) return std::nullopt;

  Rng rng = make_rng(cfg.seed, {0x72616e736163ULL});
  std::vector<int> order(n);
  std::vector<Correspondence2D3D> sample(kSampleSize);

  std::optional<PoseSE3> best;
  int best_count = -1;
  int needed = cfg.max_iters;
  int hyp = 0;
  for (; hyp < std::min(needed, cfg.max_iters); ++hyp) {
    // partial Fisher-Yates for 6 distinct indices
    for (int i = 0; i < n; ++i) order[i] = i;
    for (int i = 0; i < kSampleSize; ++i) {
      const auto j = static_cast<int>(uniform_int(rng, i, n - 1));
      std::swap(order[i], order[j]);
      sample[i] = corrs[order[i]];
    }
    PoseSE3 pose;
    try {
      pose = pnp_minimal(sample, K);
    } catch (const DegenerateError&) {
      continue;
    }
    const int count = count_inliers(pose, corrs, K, cfg.inlier_thresh_px, nullptr);
    if (count > best_count) {  // strict: earliest hypothesis wins ties
      best_count = count;
      best = pose;
      needed = required_iterations(static_cast<double>(count) / n, cfg.confidence, cfg.max_iters);
    }
  }
  if (!best || best_count < kSampleSize) return std::nullopt;

  RansacResult out;
  out.hypotheses = hyp;
  std::vector<std::uint8_t> mask;
  count_inliers(*best, corrs, K, cfg.inlier_thresh_px, &mask);
  std::vector<Correspondence2D3D> inl;
  for (int i = 0; i < n; ++i) {
    if (mask[i]) inl.push_back(corrs[i]);
  }
  RefineOptions ro;
  ro.max_iters = cfg.refine_iters;
  out.pose = refine_pose_report(*best, inl, K, ro).pose;
  out.inlier_count = count_inliers(out.pose, corrs, K, cfg.inlier_thresh_px, &out.inliers);
  if (out.inlier_count < kSampleSize) return std::nullopt;
  return out;
}

}  // namespace aceg::geo
