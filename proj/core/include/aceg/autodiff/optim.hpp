#pragma once

#include <cstdint>
#include <vector>

#include "aceg/autodiff/tensor.hpp"

namespace aceg::ad {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

template <typename T>
struct AdamWState {
  Matrix<T> m;
  Matrix<T> v;
  std::int64_t step = 0;
};

/// One AdamW update with decoupled weight decay:
///   p <- p - lr*wd*p;  m, v <- EMA(g), EMA(g^2);  p <- p - lr * m_hat / (sqrt(v_hat) + eps)
/// Throws NonFiniteError on a NaN/Inf gradient (the parameter is untouched).
template <typename T>
void adamw_step(Matrix<T>& param, const Matrix<T>& grad, AdamWState<T>& state, const AdamWConfig& cfg, double lr);

/// AdamW over a whole ParameterSet; state slot i belongs to parameter i.
template <typename T>
class AdamW {
 public:
  explicit AdamW(AdamWConfig cfg = {}) : cfg_(cfg) {}

  void step(ParameterSet<T>& params, double lr);

  const AdamWConfig& config() const { return cfg_; }
  std::vector<AdamWState<T>>& states() { return states_; }
  const std::vector<AdamWState<T>>& states() const { return states_; }

 private:
  AdamWConfig cfg_;
  std::vector<AdamWState<T>> states_;
};

/// One-cycle schedule: linear warmup from lr_max/10 to lr_max over the first
/// 10% of steps, then cosine annealing down to lr_max/100 at the last step.
double one_cycle_lr(std::int64_t step, std::int64_t total_steps, double lr_max);

extern template class AdamW<float>;
extern template class AdamW<double>;

}  // namespace aceg::ad
