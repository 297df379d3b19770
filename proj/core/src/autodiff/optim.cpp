#include "aceg/autodiff/optim.hpp"

#include <cmath>
#include <numbers>

namespace aceg::ad {

template <typename T>
void adamw_step(Matrix<T>& param, const Matrix<T>& grad, AdamWState<T>& state, const AdamWConfig& cfg,
                double lr) {
  if (!(lr > 0.0)) throw PreconditionError("learning rate must be positive");
  if (grad.rows() != param.rows() || grad.cols() != param.cols()) throw ShapeError("adamw: grad/param shape mismatch");
  if (!grad.allFinite()) throw NonFiniteError("adamw: non-finite gradient");
  if (state.m.size() == 0) {
    state.m = Matrix<T>::Zero(param.rows(), param.cols());
    state.v = Matrix<T>::Zero(param.rows(), param.cols());
  }
  if (state.m.rows() != param.rows() || state.m.cols() != param.cols()) throw ShapeError("adamw: state shape mismatch");

  ++state.step;
  const T b1 = static_cast<T>(cfg.beta1);
  const T b2 = static_cast<T>(cfg.beta2);
  const T bc1 = static_cast<T>(1.0 - std::pow(cfg.beta1, static_cast<double>(state.step)));
  const T bc2 = static_cast<T>(1.0 - std::pow(cfg.beta2, static_cast<double>(state.step)));
  const T step = static_cast<T>(lr);
  const T eps = static_cast<T>(cfg.eps);
  if (cfg.weight_decay != 0.0) param *= static_cast<T>(1.0 - lr * cfg.weight_decay);
  state.m = b1 * state.m + (T(1) - b1) * grad;
  state.v = b2 * state.v + (T(1) - b2) * grad.cwiseProduct(grad);
  param.array() -= step * (state.m.array() / bc1) / ((state.v.array() / bc2).sqrt() + eps);
}

template <typename T>
void AdamW<T>::step(ParameterSet<T>& params, double lr) {
  if (states_.size() != params.size()) states_.resize(params.size());
  for (const auto& p : params) {
    if (!p.grad.allFinite()) throw NonFiniteError("adamw: non-finite gradient for '" + p.name + "'");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    adamw_step(params[i].value(), params[i].grad, states_[i], cfg_, lr);
  }
}

double one_cycle_lr(std::int64_t step, std::int64_t total_steps, double lr_max) {
  if (total_steps < 1 || step < 0 || step >= total_steps) throw PreconditionError("one_cycle_lr: step out of range");
  if (!(lr_max > 0.0)) throw PreconditionError("one_cycle_lr: lr_max must be positive");
  const double lr_start = lr_max / 10.0;
  const double lr_end = lr_max / 100.0;
  const auto warmup = static_cast<std::int64_t>(std::floor(0.1 * static_cast<double>(total_steps)));
  if (step < warmup) {
    return lr_start + (lr_max - lr_start) * static_cast<double>(step) / static_cast<double>(warmup);
  }
  const auto span = total_steps - 1 - warmup;
  if (span <= 0) return lr_max;
  const double t = static_cast<double>(step - warmup) / static_cast<double>(span);
  return lr_end + (lr_max - lr_end) * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

template void adamw_step<float>(Matrix<float>&, const Matrix<float>&, AdamWState<float>&, const AdamWConfig&, double);
template void adamw_step<double>(Matrix<double>&, const Matrix<double>&, AdamWState<double>&, const AdamWConfig&,
                                 double);
template class AdamW<float>;
template class AdamW<double>;

}  // namespace aceg::ad
