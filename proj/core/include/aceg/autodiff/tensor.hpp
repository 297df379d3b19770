#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "aceg/common/error.hpp"

namespace aceg::ad {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Shape = std::vector<std::int64_t>;

/// Dense rank-1 or rank-2 tensor. Rank-1 tensors of length n are stored as a
/// 1 x n row so that they broadcast over batch rows.
template <typename T>
struct Tensor {
  Shape shape;
  Matrix<T> values;

  static Tensor zeros(Shape shape) {
    if (shape.empty() || shape.size() > 2) throw ShapeError("tensor rank must be 1 or 2");
    for (auto d : shape) {
      if (d < 0) throw ShapeError("negative tensor dimension");
    }
    Tensor t;
    t.shape = shape;
    const auto rows = shape.size() == 1 ? 1 : shape[0];
    const auto cols = shape.back();
    t.values = Matrix<T>::Zero(rows, cols);
    return t;
  }

  int rank() const { return static_cast<int>(shape.size()); }
  std::int64_t numel() const { return values.size(); }
  bool all_finite() const { return values.allFinite(); }
};

/// A named trainable tensor plus its accumulated gradient.
template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> tensor;
  Matrix<T> grad;

  Matrix<T>& value() { return tensor.values; }
  const Matrix<T>& value() const { return tensor.values; }
  void zero_grad() { grad.setZero(tensor.values.rows(), tensor.values.cols()); }
};

/// Ordered registry of parameters. Element addresses are stable for the
/// lifetime of the set, which lets graphs bind parameters by pointer.
template <typename T>
class ParameterSet {
 public:
  Parameter<T>& add(std::string name, Shape shape) {
    if (find(name) != nullptr) throw ShapeError("duplicate parameter '" + name + "'");
    Parameter<T> p;
    p.name = std::move(name);
    p.tensor = Tensor<T>::zeros(std::move(shape));
    p.zero_grad();
    params_.push_back(std::move(p));
    return params_.back();
  }

  Parameter<T>* find(std::string_view name) {
    for (auto& p : params_) {
      if (p.name == name) return &p;
    }
    return nullptr;
  }
  const Parameter<T>* find(std::string_view name) const {
    for (const auto& p : params_) {
      if (p.name == name) return &p;
    }
    return nullptr;
  }
  Parameter<T>& at(std::string_view name) {
    auto* p = find(name);
    if (p == nullptr) throw ShapeError("unknown parameter '" + std::string(name) + "'");
    return *p;
  }
  const Parameter<T>& at(std::string_view name) const {
    const auto* p = find(name);
    if (p == nullptr) throw ShapeError("unknown parameter '" + std::string(name) + "'");
    return *p;
  }

  Parameter<T>& operator[](std::size_t i) { return params_[i]; }
  const Parameter<T>& operator[](std::size_t i) const { return params_[i]; }
  std::size_t size() const { return params_.size(); }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void zero_grad() {
    for (auto& p : params_) p.zero_grad();
  }

  std::int64_t numel() const {
    std::int64_t n = 0;
    for (const auto& p : params_) n += p.tensor.numel();
    return n;
  }

  template <typename U>
  ParameterSet<U> cast() const {
    ParameterSet<U> out;
    for (const auto& p : params_) {
      auto& q = out.add(p.name, p.tensor.shape);
      q.tensor.values = p.tensor.values.template cast<U>();
    }
    return out;
  }

 private:
  std::deque<Parameter<T>> params_;
};

}  // namespace aceg::ad
