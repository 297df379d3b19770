#include "aceg/maploc/mapping.hpp"

#include <cmath>

#include "aceg/autodiff/optim.hpp"
#include "aceg/common/error.hpp"
#include "aceg/common/random.hpp"
#include "aceg/regressor/losses.hpp"

namespace aceg::maploc {

namespace {

enum Stream : std::uint64_t { kCode = 1, kStep };

}  // namespace

void MappingRunConfig::validate() const {
  if (iterations < 1) throw ConfigError("mapping: iterations must be >= 1");
  if (batch < 1) throw ConfigError("mapping: batch must be >= 1");
  if (!(lr_max > 0.0)) throw ConfigError("mapping: lr_max must be positive");
  if (!(weight_decay >= 0.0)) throw ConfigError("mapping: weight_decay must be >= 0");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("mapping: dropout must lie in [0, 1)");
  if (!(trim > 0.0 && trim <= 1.0)) throw ConfigError("mapping: trim must lie in (0, 1]");
  if (buffer_cap < 1) throw ConfigError("mapping: buffer_cap must be >= 1");
}

void MappingRunConfig::write(KeyValues& kv, const std::string& prefix) const {
  kv.set(prefix + "iterations", iterations);
  kv.set(prefix + "batch", batch);
  kv.set(prefix + "lr_max", lr_max);
  kv.set(prefix + "weight_decay", weight_decay);
  kv.set(prefix + "dropout", dropout);
  kv.set(prefix + "trim", trim);
  kv.set(prefix + "buffer_cap", buffer_cap);
  kv.set(prefix + "seed", seed);
}

MappingRunConfig MappingRunConfig::read(const KeyValues& kv, const std::string& prefix) {
  MappingRunConfig c;
  c.iterations = static_cast<int>(kv.get_int(prefix + "iterations", c.iterations));
  c.batch = static_cast<int>(kv.get_int(prefix + "batch", c.batch));
  c.lr_max = kv.get_double(prefix + "lr_max", c.lr_max);
  c.weight_decay = kv.get_double(prefix + "weight_decay", c.weight_decay);
  c.dropout = kv.get_double(prefix + "dropout", c.dropout);
  c.trim = kv.get_double(prefix + "trim", c.trim);
  c.buffer_cap = kv.get_int(prefix + "buffer_cap", c.buffer_cap);
  c.seed = static_cast<std::uint64_t>(kv.get_int(prefix + "seed", static_cast<std::int64_t>(c.seed)));
  c.validate();
  return c;
}

MappingRunConfig mapping_preset(const std::string& name) {
  // Tuned on the desk world; see README for the calibration numbers.
  MappingRunConfig c;
  c.trim = 0.6;
  c.dropout = 0.03;
  if (name == "fast") {
    c.iterations = 1000;
  } else if (name == "thorough") {
    c.iterations = 5000;
  } else {
    throw ConfigError("unknown mapping preset '" + name + "' (fast|thorough)");
  }
  return c;
}

reg::MapCode map_novel_scene(reg::Regressor<float>& model, const buf::NovelSceneBuffer& buffer,
                             const MappingRunConfig& cfg, const std::string& scene_id, MappingStats* stats,
                             const MappingProgress& progress) {
  cfg.validate();
  if (buffer.size() < 1) throw PreconditionError("map_novel_scene: empty buffer");
  const auto& mc = model.config();
  if (buffer.embeddings.cols() != mc.feat_dim) throw ShapeError("map_novel_scene: embedding width mismatch");
  if (static_cast<std::int64_t>(buffer.camera_index.size()) != buffer.size() || buffer.pixels.rows() != buffer.size()) {
    throw ShapeError("map_novel_scene: buffer columns disagree in length");
  }

  reg::MapCode code = reg::init_map_code(mc.code_tokens, mc.code_dim, derive_seed(cfg.seed, {kCode}), scene_id);
  ad::AdamWState<float> state;
  const ad::AdamWConfig opt{0.9, 0.999, 1e-8, cfg.weight_decay};
  const auto n = std::min<std::int64_t>(buffer.size(), cfg.buffer_cap);
  const float keep_scale = static_cast<float>(1.0 / (1.0 - cfg.dropout));
  MappingStats local;

  for (int step = 0; step < cfg.iterations; ++step) {
    Rng rng = make_rng(cfg.seed, {kStep, static_cast<std::uint64_t>(step)});
    ad::Matrix<float> E(cfg.batch, mc.feat_dim);
    std::vector<reg::ReprojRecord> records(static_cast<std::size_t>(cfg.batch));
    for (int i = 0; i < cfg.batch; ++i) {
      const auto r = static_cast<Eigen::Index>(uniform_int(rng, 0, n - 1));
      E.row(i) = buffer.embeddings.row(r);
      if (cfg.dropout > 0.0) {
        for (Eigen::Index j = 0; j < E.cols(); ++j) {
          E(i, j) = uniform(rng, 0.0, 1.0) < cfg.dropout ? 0.0f : E(i, j) * keep_scale;
        }
      }
      const auto& cam = buffer.cameras.at(static_cast<std::size_t>(buffer.camera_index[static_cast<std::size_t>(r)]));
      auto& rec = records[static_cast<std::size_t>(i)];
      rec.K = cam.K;
      rec.T_wc = cam.T_wc;
      rec.pixel = buffer.pixels.row(r).transpose();
      rec.depth_target = reg::depth_prior_target(geo::pixel_ray(cam.K, rec.pixel), cam.T_wc, buffer.depth_prior);
    }

    ad::Graph<float> g;
    const auto cv = g.variable(code.tokens);
    reg::ReprojStats rs;
    const auto out = model.forward(g, g.constant(std::move(E)), cv, false);
    const auto loss = g.trimmed_mean(reg::reprojection_nll_rows(g, out, records, &rs), cfg.trim);
    const double lv = g.value(loss)(0, 0);
    if (!std::isfinite(lv)) throw NonFiniteError("map_novel_scene: non-finite loss at step " + std::to_string(step));
    g.backward(loss);
    const auto& grad = g.grad(cv);
    if (!grad.allFinite()) throw NonFiniteError("map_novel_scene: non-finite gradient at step " + std::to_string(step));
    const double lr = ad::one_cycle_lr(step, cfg.iterations, cfg.lr_max);
    ad::adamw_step(code.tokens, grad, state, opt, lr);

    if (step == 0) local.first_loss = lv;
    local.last_loss = lv;
    local.valid += rs.valid;
    local.invalid += rs.invalid;
    ++local.steps;
    if (progress) progress(step, lv, lr);
  }
  code.iteration = static_cast<std::uint64_t>(cfg.iterations);
  if (stats) *stats = local;
  return code;
}

}  // namespace aceg::maploc
