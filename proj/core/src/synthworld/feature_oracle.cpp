#include "aceg/synthworld/feature_oracle.hpp"

#include <cmath>

#include "aceg/common/error.hpp"

namespace aceg::world {

namespace {
constexpr int kNormSamples = 2000;

Eigen::VectorXd random_unit(Rng& rng, int dim) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = normal(rng);
  return v.normalized();
}
}  // namespace

void FeatureOracleConfig::validate() const {
  if (latent_dim < 1 || feat_dim < 1 || hidden < 1) throw ConfigError("feature oracle dimensions must be positive");
  if (alpha < 0.0 || beta < 0.0 || noise < 0.0) throw ConfigError("feature oracle weights must be non-negative");
}

Eigen::VectorXd FeatureOracle::TanhMap::operator()(const Eigen::VectorXd& x) const {
  return W2 * ((pre * (W1 * x) + b1).array().tanh().matrix());
}

FeatureOracle::TanhMap FeatureOracle::make_map(int in, int out, int hidden, double pre, Rng& rng) {
  TanhMap m;
  m.pre = pre;
  m.W1.resize(hidden, in);
  m.b1.resize(hidden);
  m.W2.resize(out, hidden);
  for (Eigen::Index i = 0; i < m.W1.size(); ++i) m.W1.data()[i] = normal(rng) / std::sqrt(static_cast<double>(in));
  for (Eigen::Index i = 0; i < m.b1.size(); ++i) m.b1[i] = 0.1 * normal(rng);
  for (Eigen::Index i = 0; i < m.W2.size(); ++i) m.W2.data()[i] = normal(rng) / std::sqrt(static_cast<double>(hidden));
  double acc = 0.0;
  for (int s = 0; s < kNormSamples; ++s) acc += m(random_unit(rng, in)).squaredNorm();
  m.rms = std::sqrt(acc / kNormSamples);
  return m;
}

FeatureOracle::FeatureOracle(const FeatureOracleConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  Rng rng = make_rng(cfg_.seed, {0x6f7261636c65ULL});
  F_ = make_map(cfg_.latent_dim, cfg_.feat_dim, cfg_.hidden, cfg_.pre_scale, rng);
  G_ = make_map(cfg_.latent_dim, cfg_.feat_dim, cfg_.hidden, cfg_.pre_scale, rng);
  B_ = make_map(3, cfg_.feat_dim, cfg_.hidden, cfg_.pre_scale, rng);
}

Eigen::VectorXd FeatureOracle::appearance_term(const Eigen::VectorXd& a) const { return F_(a) / F_.rms; }
Eigen::VectorXd FeatureOracle::condition_term(const Eigen::VectorXd& a) const { return G_(a) / G_.rms; }
Eigen::VectorXd FeatureOracle::view_term(const Eigen::Vector3d& v) const { return B_(v) / B_.rms; }

Eigen::VectorXd FeatureOracle::embed(const Eigen::VectorXd& appearance, const Eigen::Vector3d& view_dir,
                                     double condition, Rng& noise_rng) const {
  if (appearance.size() != cfg_.latent_dim) throw ShapeError("appearance latent has wrong dimension");
  if (!(condition >= 0.0 && condition <= 1.0)) throw PreconditionError("condition must lie in [0, 1]");
  Eigen::VectorXd e = appearance_term(appearance);
  if (cfg_.alpha != 0.0 && condition != 0.0) e += cfg_.alpha * condition * condition_term(appearance);
  if (cfg_.beta != 0.0) e += cfg_.beta * view_term(view_dir);
  e *= std::sqrt(static_cast<double>(cfg_.feat_dim));
  if (cfg_.noise > 0.0) {
    for (Eigen::Index i = 0; i < e.size(); ++i) e[i] += normal(noise_rng, 0.0, cfg_.noise);
  }
  return e;
}

Eigen::VectorXd FeatureOracle::embed(const Eigen::VectorXd& appearance, const Eigen::Vector3d& view_dir,
                                     double condition, std::uint64_t noise_seed) const {
  Rng rng(noise_seed);
  return embed(appearance, view_dir, condition, rng);
}

}  // namespace aceg::world
