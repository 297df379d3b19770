#include "aceg/synthworld/render.hpp"

#include "aceg/common/error.hpp"

namespace aceg::world {

ViewRender render_view(const Scene& scene, const CameraFrame& frame, const FeatureOracle& oracle, double condition,
                       std::uint64_t seed) {
  if (frame.T_wc.orthonormality_error() > 1e-6) throw PreconditionError("render_view: invalid frame pose");
  ViewRender out;
  out.frame = frame;
  out.condition = condition;
  Rng rng = make_rng(seed, {0x72656e646572ULL});
  for (int i = 0; i < scene.size(); ++i) {
    const Eigen::Vector3d y = scene.points.row(i).transpose();
    const auto p = geo::project(frame.K, frame.T_wc, y);
    if (!p.valid || !frame.in_image(p.pixel)) continue;
    PatchObservation o;
    o.point_id = i;
    o.pixel = p.pixel;
    o.point = y;
    const Eigen::Vector3d dir = frame.T_wc.to_camera(y).normalized();
    o.embedding = oracle.embed(scene.latents.row(i).transpose(), dir, condition, rng).cast<float>();
    out.observations.push_back(std::move(o));
  }
  return out;
}

}  // namespace aceg::world
