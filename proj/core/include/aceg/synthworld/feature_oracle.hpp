#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "aceg/common/random.hpp"

namespace aceg::world {

struct FeatureOracleConfig {
  int latent_dim = 16;  // k
  int feat_dim = 32;    // D_feat
  int hidden = 16;      // width of the random tanh maps
  double pre_scale = 1.0;
  double alpha = 0.5;   // condition drift strength
  double beta = 0.1;    // view dependence
  double noise = 0.05;  // per-coordinate Gaussian noise std
  std::uint64_t seed = 12345;

  void validate() const;
};

/// Stand-in for a frozen image encoder:
///   e = sqrt(D) * (F(a)/s_F + alpha*c*G(a)/s_G + beta*B(v)/s_B) + N(0, noise^2)
/// F, G, B are fixed random one-hidden-layer tanh maps and s_* their
/// Monte-Carlo RMS norms, so each term has unit RMS before scaling.
class FeatureOracle {
 public:
  explicit FeatureOracle(const FeatureOracleConfig& cfg);

  const FeatureOracleConfig& config() const { return cfg_; }

  Eigen::VectorXd embed(const Eigen::VectorXd& appearance, const Eigen::Vector3d& view_dir, double condition,
                        Rng& noise_rng) const;
  Eigen::VectorXd embed(const Eigen::VectorXd& appearance, const Eigen::Vector3d& view_dir, double condition,
                        std::uint64_t noise_seed) const;

  /// Noise-free parts, exposed for tests.
  Eigen::VectorXd appearance_term(const Eigen::VectorXd& a) const;  // F(a)/s_F
  Eigen::VectorXd condition_term(const Eigen::VectorXd& a) const;   // G(a)/s_G
  Eigen::VectorXd view_term(const Eigen::Vector3d& v) const;        // B(v)/s_B

 private:
  struct TanhMap {
    Eigen::MatrixXd W1;
    Eigen::VectorXd b1;
    Eigen::MatrixXd W2;
    double pre = 1.0;
    double rms = 1.0;
    Eigen::VectorXd operator()(const Eigen::VectorXd& x) const;
  };
  static TanhMap make_map(int in, int out, int hidden, double pre, Rng& rng);

  FeatureOracleConfig cfg_;
  TanhMap F_, G_, B_;
};

}  // namespace aceg::world
