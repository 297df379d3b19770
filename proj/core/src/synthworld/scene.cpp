#include "aceg/synthworld/scene.hpp"

#include <cmath>
#include <numbers>

#include "aceg/common/error.hpp"
#include "aceg/common/random.hpp"

namespace aceg::world {

void SceneConfig::validate() const {
  if (num_points < 1) throw ConfigError("scene needs at least one point");
  if (latent_dim < 1) throw ConfigError("latent_dim must be positive");
  if (!((box_max - box_min).array() > 0.0).all()) throw ConfigError("scene box must have positive extent");
}

Scene gen_scene(const SceneConfig& cfg, std::uint64_t seed, std::string id) {
  cfg.validate();
  Scene s;
  s.id = std::move(id);
  s.seed = seed;
  s.box_min = cfg.box_min;
  s.box_max = cfg.box_max;
  Rng rng = make_rng(seed, {0x7363656e65ULL});
  s.points.resize(cfg.num_points, 3);
  for (int i = 0; i < cfg.num_points; ++i) {
    for (int a = 0; a < 3; ++a) s.points(i, a) = uniform(rng, cfg.box_min[a], cfg.box_max[a]);
  }
  s.latents.resize(cfg.num_points, cfg.latent_dim);
  for (int i = 0; i < cfg.num_points; ++i) {
    for (int j = 0; j < cfg.latent_dim; ++j) s.latents(i, j) = normal(rng);
    s.latents.row(i).normalize();
  }
  return s;
}

void TrajectoryConfig::validate() const {
  K.validate();
  if (width < 1 || height < 1) throw ConfigError("image size must be positive");
  if (!(radius > 0.0)) throw ConfigError("orbit radius must be positive");
  if (min_visible < 0 || max_attempts < 1) throw ConfigError("bad visibility settings");
}

geo::PoseSE3 look_at(const Eigen::Vector3d& center, const Eigen::Vector3d& target) {
  const Eigen::Vector3d z = (target - center).normalized();
  Eigen::Vector3d x = z.cross(Eigen::Vector3d::UnitZ());
  if (x.norm() < 1e-9) throw PreconditionError("look_at: view direction parallel to up");
  x.normalize();
  const Eigen::Vector3d y = z.cross(x);
  geo::PoseSE3 T;
  T.R.col(0) = x;
  T.R.col(1) = y;
  T.R.col(2) = z;
  T.t = center;
  return T;
}

std::vector<int> visible_points(const Scene& scene, const CameraFrame& frame) {
  std::vector<int> ids;
  for (int i = 0; i < scene.size(); ++i) {
    const auto p = geo::project(frame.K, frame.T_wc, scene.points.row(i).transpose());
    if (p.valid && frame.in_image(p.pixel)) ids.push_back(i);
  }
  return ids;
}

std::vector<CameraFrame> gen_trajectory(const Scene& scene, int n_frames, std::uint64_t seed,
                                        const TrajectoryConfig& cfg) {
  cfg.validate();
  if (n_frames < 2) throw PreconditionError("trajectory needs at least 2 frames");
  const Eigen::Vector3d centre = scene.box_center();
  for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
    Rng rng = make_rng(seed, {0x74726aULL, static_cast<std::uint64_t>(attempt)});
    const double theta0 = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    std::vector<CameraFrame> frames;
    bool ok = true;
    for (int i = 0; i < n_frames && ok; ++i) {
      const double th = theta0 + cfg.step_rad * i;
      const double r = cfg.radius + cfg.radius_wobble * std::sin(0.3 * i) + normal(rng, 0.0, cfg.radius_jitter);
      const Eigen::Vector3d c = centre + Eigen::Vector3d(r * std::cos(th), r * std::sin(th),
                                                         cfg.height_mean + cfg.height_wobble * std::sin(0.2 * i));
      const Eigen::Vector3d target =
          centre + cfg.target_jitter * Eigen::Vector3d(normal(rng), normal(rng), normal(rng));
      CameraFrame f;
      f.index = i;
      f.K = cfg.K;
      f.width = cfg.width;
      f.height = cfg.height;
      f.T_wc = look_at(c, target);
      ok = static_cast<int>(visible_points(scene, f).size()) >= cfg.min_visible;
      frames.push_back(f);
    }
    if (ok) return frames;
  }
  throw PreconditionError("trajectory: visibility constraint unsatisfiable after " +
                          std::to_string(cfg.max_attempts) + " attempts");
}

}  // namespace aceg::world
