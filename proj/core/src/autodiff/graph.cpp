#include "aceg/autodiff/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace aceg::ad {

namespace {

std::string dims(const auto& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

template <typename T>
constexpr T kGeluC = T(0.7978845608028654);  // sqrt(2/pi)
template <typename T>
constexpr T kGeluA = T(0.044715);

}  // namespace

std::int64_t trim_count(std::int64_t n, double keep_fraction) {
  if (n <= 0) return 0;
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) {
    throw PreconditionError("trim fraction must lie in (0, 1]");
  }
  auto k = static_cast<std::int64_t>(std::ceil(keep_fraction * static_cast<double>(n) - 1e-9));
  return std::clamp<std::int64_t>(k, 1, n);
}

std::vector<std::int64_t> smallest_k_indices(std::span<const double> values, std::int64_t k) {
  std::vector<std::int64_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  k = std::clamp<std::int64_t>(k, 0, static_cast<std::int64_t>(idx.size()));
  auto less = [&](std::int64_t a, std::int64_t b) {
    return values[a] < values[b] || (values[a] == values[b] && a < b);
  };
  std::nth_element(idx.begin(), idx.begin() + k, idx.end(), less);
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

template <typename T>
Var Graph<T>::push(Node n) {
  // a NaN or inf anywhere makes the (vectorized) sum non-finite; the exact
  // scan only runs to rule out overflow of the sum itself
  if (!std::isfinite(n.value().sum()) && !n.value().allFinite()) {
    throw NonFiniteError(std::string("non-finite value produced by op '") + n.name + "'");
  }
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::int32_t>(nodes_.size() - 1)};
}

template <typename T>
const typename Graph<T>::Node& Graph<T>::node(Var v) const {
  if (v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size()) throw PreconditionError("invalid Var");
  return nodes_[v.id];
}

template <typename T>
bool Graph<T>::any_requires_grad(std::initializer_list<Var> vs) const {
  for (auto v : vs) {
    if (node(v).requires_grad) return true;
  }
  return false;
}

template <typename T>
const typename Graph<T>::Mat& Graph<T>::value(Var v) const {
  return node(v).value();
}

template <typename T>
const typename Graph<T>::Mat& Graph<T>::grad(Var v) const {
  const auto& n = node(v);
  if (!n.leaf) throw PreconditionError("gradients are only retained for leaves");
  return n.grad;
}

template <typename T>
bool Graph<T>::requires_grad(Var v) const {
  return node(v).requires_grad;
}

template <typename T>
Var Graph<T>::constant(Mat value) {
  Node n;
  n.own = std::move(value);
  n.leaf = true;
  n.name = "constant";
  return push(std::move(n));
}

template <typename T>
Var Graph<T>::variable(Mat value) {
  Node n;
  n.own = std::move(value);
  n.leaf = true;
  n.requires_grad = true;
  n.name = "variable";
  return push(std::move(n));
}

template <typename T>
Var Graph<T>::parameter(Parameter<T>& p, bool trainable) {
  Node n;
  n.borrowed = &p.tensor.values;
  n.leaf = true;
  n.requires_grad = trainable;
  n.param = trainable ? &p : nullptr;
  n.name = "parameter";
  return push(std::move(n));
}

template <typename T>
Var Graph<T>::custom(Mat value, std::vector<Var> inputs, BackwardFn backward, const char* name) {
  Node n;
  n.own = std::move(value);
  for (auto v : inputs) n.requires_grad = n.requires_grad || node(v).requires_grad;
  n.inputs = std::move(inputs);
  if (n.requires_grad) n.backward = std::move(backward);
  n.name = name;
  return push(std::move(n));
}

template <typename T>
Var Graph<T>::linear(Var x, Var weight, Var bias) {
  const auto& X = value(x);
  const auto& W = value(weight);
  const auto& b = value(bias);
  if (X.cols() != W.cols() || b.rows() != 1 || b.cols() != W.rows()) {
    throw ShapeError("linear: x " + dims(X) + ", W " + dims(W) + ", b " + dims(b));
  }
  Mat y = X * W.transpose();
  y.rowwise() += b.row(0);
  return custom(std::move(y), {x, weight, bias},
                [this, x, weight](const Mat& g, std::span<Mat* const> in) {
                  if (in[0]) in[0]->noalias() += g * value(weight);
                  if (in[1]) in[1]->noalias() += g.transpose() * value(x);
                  if (in[2]) *in[2] += g.colwise().sum();
                },
                "linear");
}

template <typename T>
Var Graph<T>::matmul(Var a, Var b) {
  const auto& A = value(a);
  const auto& B = value(b);
  if (A.cols() != B.rows()) throw ShapeError("matmul: " + dims(A) + " * " + dims(B));
  Mat y = A * B;
  return custom(std::move(y), {a, b},
                [this, a, b](const Mat& g, std::span<Mat* const> in) {
                  if (in[0]) in[0]->noalias() += g * value(b).transpose();
                  if (in[1]) in[1]->noalias() += value(a).transpose() * g;
                },
                "matmul");
}

template <typename T>
Var Graph<T>::add(Var a, Var b) {
  const auto& A = value(a);
  const auto& B = value(b);
  if (A.rows() != B.rows() || A.cols() != B.cols()) throw ShapeError("add: " + dims(A) + " + " + dims(B));
  return custom(A + B, {a, b},
                [](const Mat& g, std::span<Mat* const> in) {
                  if (in[0]) *in[0] += g;
                  if (in[1]) *in[1] += g;
                },
                "add");
}

template <typename T>
Var Graph<T>::mul(Var a, Var b) {
  const auto& A = value(a);
  const auto& B = value(b);
  if (A.rows() != B.rows() || A.cols() != B.cols()) throw ShapeError("mul: " + dims(A) + " * " + dims(B));
  return custom(A.cwiseProduct(B), {a, b},
                [this, a, b](const Mat& g, std::span<Mat* const> in) {
                  if (in[0]) *in[0] += g.cwiseProduct(value(b));
                  if (in[1]) *in[1] += g.cwiseProduct(value(a));
                },
                "mul");
}

template <typename T>
Var Graph<T>::scale(Var a, T factor) {
  return custom(value(a) * factor, {a},
                [factor](const Mat& g, std::span<Mat* const> in) {
                  if (in[0]) *in[0] += g * factor;
                },
                "scale");
}

template <typename T>
Var Graph<T>::layer_norm(Var x, Var gain, Var bias, T eps) {
  const auto& X = value(x);
  const auto& G = value(gain);
  const auto& B = value(bias);
  const auto d = X.cols();
  if (d < 2) throw ShapeError("layer_norm needs at least 2 features");
  if (G.rows() != 1 || G.cols() != d || B.rows() != 1 || B.cols() != d) {
    throw ShapeError("layer_norm: x " + dims(X) + ", gain " + dims(G) + ", bias " + dims(B));
  }
  const auto n = X.rows();
  Mat xhat(n, d);
  Eigen::Matrix<T, Eigen::Dynamic, 1> inv(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const T mu = X.row(r).mean();
    const T var = (X.row(r).array() - mu).square().mean();
    inv(r) = T(1) / std::sqrt(var + eps);
    xhat.row(r) = (X.row(r).array() - mu) * inv(r);
  }
  Mat y = xhat.array().rowwise() * G.row(0).array();
  y.rowwise() += B.row(0);
  return custom(std::move(y), {x, gain, bias},
                [this, gain, xhat = std::move(xhat), inv = std::move(inv)](const Mat& g,
                                                                          std::span<Mat* const> in) {
                  const auto& Gv = value(gain);
                  if (in[0]) {
                    const auto d = static_cast<T>(xhat.cols());
                    for (Eigen::Index r = 0; r < xhat.rows(); ++r) {
                      const auto dxhat = (g.row(r).array() * Gv.row(0).array()).eval();
                      const T m1 = dxhat.sum() / d;
                      const T m2 = (dxhat * xhat.row(r).array()).sum() / d;
                      in[0]->row(r).array() += inv(r) * (dxhat - m1 - xhat.row(r).array() * m2);
                    }
                  }
                  if (in[1]) *in[1] += g.cwiseProduct(xhat).colwise().sum();
                  if (in[2]) *in[2] += g.colwise().sum();
                },
                "layer_norm");
}

template <typename T>
Var Graph<T>::gelu(Var x) {
  const auto& X = value(x);
  // tanh is kept for backward; array form lets Eigen vectorize it
  Mat t = (kGeluC<T> * (X.array() + kGeluA<T> * X.array().cube())).tanh().matrix();
  Mat y = (T(0.5) * X.array() * (T(1) + t.array())).matrix();
  return custom(std::move(y), {x},
                [this, x, t = std::move(t)](const Mat& g, std::span<Mat* const> in) {
                  if (!in[0]) return;
                  const auto v = value(x).array();
                  const auto ta = t.array();
                  in[0]->array() += g.array() * (T(0.5) * (T(1) + ta) + T(0.5) * v * (T(1) - ta.square()) * kGeluC<T> *
                                                                          (T(1) + T(3) * kGeluA<T> * v.square()));
                },
                "gelu");
}

template <typename T>
Var Graph<T>::softmax(Var x) {
  const auto& X = value(x);
  if (X.cols() < 1) throw ShapeError("softmax of an empty vector");
  Mat y(X.rows(), X.cols());
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    const T mx = X.row(r).maxCoeff();
    y.row(r) = (X.row(r).array() - mx).exp();
    y.row(r) /= y.row(r).sum();
  }
  const std::int32_t self = static_cast<std::int32_t>(nodes_.size());
  return custom(std::move(y), {x},
                [this, self](const Mat& g, std::span<Mat* const> in) {
                  if (!in[0]) return;
                  const auto& Y = nodes_[self].value();
                  const auto dot = (g.cwiseProduct(Y)).rowwise().sum().eval();
                  *in[0] += (Y.array() * (g.array().colwise() - dot.array())).matrix();
                },
                "softmax");
}

template <typename T>
Var Graph<T>::attention(Var q, Var k, Var v, int heads) {
  const auto& Q = value(q);
  const auto& K = value(k);
  const auto& V = value(v);
  if (K.rows() < 1) throw ShapeError("attention over zero key/value tokens");
  if (heads < 1 || Q.cols() % heads != 0) throw ShapeError("attention: heads must divide the model width");
  if (K.cols() != Q.cols() || V.cols() != Q.cols() || K.rows() != V.rows()) {
    throw ShapeError("attention: q " + dims(Q) + ", k " + dims(K) + ", v " + dims(V));
  }
  const auto dh = Q.cols() / heads;
  const T s = T(1) / std::sqrt(static_cast<T>(dh));
  Mat out(Q.rows(), Q.cols());
  std::vector<Mat> weights(heads);
  for (int h = 0; h < heads; ++h) {
    Mat a = (Q.middleCols(h * dh, dh) * K.middleCols(h * dh, dh).transpose()) * s;
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      const T mx = a.row(r).maxCoeff();
      a.row(r) = (a.row(r).array() - mx).exp();
      a.row(r) /= a.row(r).sum();
    }
    out.middleCols(h * dh, dh).noalias() = a * V.middleCols(h * dh, dh);
    weights[h] = std::move(a);
  }
  return custom(std::move(out), {q, k, v},
                [this, q, k, v, heads, dh, s, weights = std::move(weights)](const Mat& g,
                                                                           std::span<Mat* const> in) {
                  const auto& Qv = value(q);
                  const auto& Kv = value(k);
                  const auto& Vv = value(v);
                  for (int h = 0; h < heads; ++h) {
                    const auto& A = weights[h];
                    const auto gh = g.middleCols(h * dh, dh);
                    if (in[2]) in[2]->middleCols(h * dh, dh).noalias() += A.transpose() * gh;
                    if (!in[0] && !in[1]) continue;
                    Mat dA = gh * Vv.middleCols(h * dh, dh).transpose();
                    const auto dot = dA.cwiseProduct(A).rowwise().sum().eval();
                    Mat dS = (A.array() * (dA.array().colwise() - dot.array())).matrix() * s;
                    if (in[0]) in[0]->middleCols(h * dh, dh).noalias() += dS * Kv.middleCols(h * dh, dh);
                    if (in[1]) in[1]->middleCols(h * dh, dh).noalias() += dS.transpose() * Qv.middleCols(h * dh, dh);
                  }
                },
                "attention");
}

template <typename T>
Var Graph<T>::sum(Var x) {
  Mat y(1, 1);
  y(0, 0) = value(x).sum();
  return custom(std::move(y), {x},
                [](const Mat& g, std::span<Mat* const> in) {
                  if (in[0]) in[0]->array() += g(0, 0);
                },
                "sum");
}

template <typename T>
Var Graph<T>::mean(Var x) {
  const auto n = value(x).size();
  if (n == 0) throw ShapeError("mean of an empty tensor");
  Mat y(1, 1);
  y(0, 0) = value(x).mean();
  return custom(std::move(y), {x},
                [n](const Mat& g, std::span<Mat* const> in) {
                  if (in[0]) in[0]->array() += g(0, 0) / static_cast<T>(n);
                },
                "mean");
}

template <typename T>
Var Graph<T>::concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_rows of nothing");
  const auto cols = value(parts[0]).cols();
  Eigen::Index rows = 0;
  for (auto p : parts) {
    if (value(p).cols() != cols) throw ShapeError("concat_rows: column mismatch");
    rows += value(p).rows();
  }
  Mat y(rows, cols);
  std::vector<Eigen::Index> offsets;
  Eigen::Index r = 0;
  for (auto p : parts) {
    offsets.push_back(r);
    y.middleRows(r, value(p).rows()) = value(p);
    r += value(p).rows();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  std::vector<Eigen::Index> counts;
  for (auto p : parts) counts.push_back(value(p).rows());
  return custom(std::move(y), std::move(inputs),
                [offsets = std::move(offsets), counts = std::move(counts)](const Mat& g,
                                                                          std::span<Mat* const> in) {
                  for (std::size_t i = 0; i < in.size(); ++i) {
                    if (in[i]) *in[i] += g.middleRows(offsets[i], counts[i]);
                  }
                },
                "concat_rows");
}

template <typename T>
Var Graph<T>::trimmed_mean(Var x, double keep_fraction) {
  const auto& X = value(x);
  if (X.rows() != 1 && X.cols() != 1) throw ShapeError("trimmed_mean expects a vector, got " + dims(X));
  const auto n = X.size();
  if (n == 0) throw ShapeError("trimmed_mean of an empty vector");
  const auto k = trim_count(n, keep_fraction);
  std::vector<double> vals(n);
  for (Eigen::Index i = 0; i < n; ++i) vals[i] = static_cast<double>(X.data()[i]);
  auto keep = smallest_k_indices(vals, k);
  T acc = 0;
  for (auto i : keep) acc += X.data()[i];
  Mat y(1, 1);
  y(0, 0) = acc / static_cast<T>(k);
  return custom(std::move(y), {x},
                [keep = std::move(keep), k](const Mat& g, std::span<Mat* const> in) {
                  if (!in[0]) return;
                  for (auto i : keep) in[0]->data()[i] += g(0, 0) / static_cast<T>(k);
                },
                "trimmed_mean");
}

template <typename T>
void Graph<T>::backward(Var loss) {
  auto& root = nodes_.at(loss.id);
  if (root.value().rows() != 1 || root.value().cols() != 1) {
    throw ShapeError("backward needs a scalar loss, got " + dims(root.value()));
  }
  if (!root.requires_grad) return;
  root.grad = Mat::Ones(1, 1);
  std::vector<Mat*> slots;
  for (std::int32_t i = loss.id; i >= 0; --i) {
    auto& n = nodes_[i];
    if (!n.requires_grad || n.grad.size() == 0) continue;
    if (n.leaf) {
      if (n.param != nullptr) {
        auto& pg = n.param->grad;
        if (pg.rows() != n.grad.rows() || pg.cols() != n.grad.cols()) pg.setZero(n.grad.rows(), n.grad.cols());
        pg += n.grad;
      }
      continue;
    }
    slots.assign(n.inputs.size(), nullptr);
    for (std::size_t j = 0; j < n.inputs.size(); ++j) {
      auto& in = nodes_[n.inputs[j].id];
      if (!in.requires_grad) continue;
      if (in.grad.size() == 0) in.grad.setZero(in.value().rows(), in.value().cols());
      slots[j] = &in.grad;
    }
    n.backward(n.grad, slots);
    n.grad.resize(0, 0);
  }
}

template class Graph<float>;
template class Graph<double>;

}  // namespace aceg::ad
