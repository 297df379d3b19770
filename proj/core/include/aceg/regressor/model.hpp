#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "aceg/autodiff/blocks.hpp"
#include "aceg/common/kv.hpp"
#include "aceg/regressor/map_code.hpp"

namespace aceg::reg {

/// Bound on the log-scale output: sigma = exp(clamp(s, -6, 6)).
inline constexpr double kLogSigmaBound = 6.0;

struct RegressorConfig {
  int feat_dim = 32;
  int model_dim = 64;
  int blocks = 2;
  int heads = 2;
  int ffn_mult = 4;
  int head_hidden = 64;
  int code_tokens = 64;  // N_C used when creating fresh codes
  int code_dim = 64;     // D_map

  void validate() const;
  void write(KeyValues& kv, const std::string& prefix = "model.") const;
  static RegressorConfig read(const KeyValues& kv, const std::string& prefix = "model.");
};

struct CoordPrediction {
  Eigen::Vector3d y = Eigen::Vector3d::Zero();
  double sigma = 1.0;
};

/// f_theta(e, C): input projection, N pre-norm cross-attention blocks whose
/// keys/values are the map-code tokens, then a 2-layer head without any
/// normalization producing (y, s).
template <typename T>
class Regressor {
 public:
  Regressor() = default;
  explicit Regressor(RegressorConfig cfg);

  /// Fresh weights: PyTorch-style uniform fan-in init, unit LN gains.
  static Regressor init(const RegressorConfig& cfg, std::uint64_t seed);

  const RegressorConfig& config() const { return cfg_; }
  ad::ParameterSet<T>& params() { return params_; }
  const ad::ParameterSet<T>& params() const { return params_; }

  /// Builds the forward pass. `embeddings` is n x feat_dim, `code` is
  /// N_C x code_dim. Returns n x 4 raw outputs (y, s). With `trainable`
  /// false the weights enter the graph as constants and receive no gradient.
  ad::Var forward(ad::Graph<T>& g, ad::Var embeddings, ad::Var code, bool trainable);

  /// Inference helpers (no gradients).
  std::vector<CoordPrediction> regress_batch(const ad::Matrix<T>& embeddings, const ad::Matrix<T>& code);
  CoordPrediction regress(const Eigen::Ref<const Eigen::Matrix<T, Eigen::Dynamic, 1>>& e, const ad::Matrix<T>& code);

  template <typename U>
  Regressor<U> cast() const {
    Regressor<U> out(cfg_);
    for (std::size_t i = 0; i < params_.size(); ++i) {
      out.params()[i].value() = params_[i].value().template cast<U>();
    }
    return out;
  }

 private:
  RegressorConfig cfg_;
  ad::ParameterSet<T> params_;
};

/// Converts a raw output row into (y, sigma).
template <typename Row>
CoordPrediction decode_output(const Row& row) {
  CoordPrediction p;
  p.y = Eigen::Vector3d(static_cast<double>(row(0)), static_cast<double>(row(1)), static_cast<double>(row(2)));
  const double s = std::clamp(static_cast<double>(row(3)), -kLogSigmaBound, kLogSigmaBound);
  p.sigma = std::exp(s);
  return p;
}

void save_regressor(const Regressor<float>& model, const std::filesystem::path& path);
Regressor<float> load_regressor(const RegressorConfig& cfg, const std::filesystem::path& path);

extern template class Regressor<float>;
extern template class Regressor<double>;

}  // namespace aceg::reg
