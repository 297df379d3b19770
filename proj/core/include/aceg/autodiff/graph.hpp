#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "aceg/autodiff/tensor.hpp"

namespace aceg::ad {

/// Handle to a node of a Graph.
struct Var {
  std::int32_t id = -1;
  bool valid() const { return id >= 0; }
};

/// Tape of batched dense operations with reverse-mode differentiation.
///
/// Every op works on row-major matrices whose rows are independent samples;
/// a single vector is a 1-row matrix. Nodes are appended in evaluation order,
/// so the node list is always a topological order. Values are checked for
/// finiteness as they are produced; a NaN or Inf raises NonFiniteError.
///
/// A graph is built for one forward/backward pass and then discarded. It is
/// single-threaded; independent graphs may live on different threads.
template <typename T>
class Graph {
 public:
  using Mat = Matrix<T>;
  /// Receives d(loss)/d(output) and one slot per input. A slot is null when
  /// the corresponding input does not require a gradient; non-null slots are
  /// zero-initialized on first use and must be accumulated into (+=).
  using BackwardFn = std::function<void(const Mat& out_grad, std::span<Mat* const> input_grads)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  /// Leaf without gradient.
  Var constant(Mat value);
  /// Leaf with gradient; read it with grad() after backward().
  Var variable(Mat value);
  /// Leaf bound to a parameter. The value is borrowed, not copied. When
  /// `trainable`, backward() accumulates into `p.grad`.
  Var parameter(Parameter<T>& p, bool trainable = true);
  /// Extension point for fused ops defined outside the engine.
  Var custom(Mat value, std::vector<Var> inputs, BackwardFn backward, const char* name = "custom");

  const Mat& value(Var v) const;
  const Mat& grad(Var v) const;
  bool requires_grad(Var v) const;
  std::size_t size() const { return nodes_.size(); }

  /// y = x W^T + b, x: n x in, W: out x in, b: 1 x out.
  Var linear(Var x, Var weight, Var bias);
  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, T factor);
  /// Row-wise layer normalization with affine gain/bias (each 1 x d).
  Var layer_norm(Var x, Var gain, Var bias, T eps = T(1e-5));
  /// tanh-approximated GELU.
  Var gelu(Var x);
  /// Row-wise softmax with max subtraction.
  Var softmax(Var x);
  /// Multi-head scaled dot-product attention. q: n x d, k and v: m x d; the
  /// head split is over columns and the scale is 1/sqrt(d/heads).
  Var attention(Var q, Var k, Var v, int heads);
  Var sum(Var x);
  Var mean(Var x);
  Var concat_rows(std::span<const Var> parts);
  /// Mean of the ceil(keep_fraction * n) smallest entries of a vector. Ties
  /// are broken by index so the selection is deterministic.
  Var trimmed_mean(Var x, double keep_fraction);

  /// Reverse pass from a 1 x 1 node. Gradients of interior nodes are released
  /// once propagated; leaves keep theirs.
  void backward(Var loss);

 private:
  struct Node {
    Mat own;
    const Mat* borrowed = nullptr;
    Mat grad;
    std::vector<Var> inputs;
    BackwardFn backward;
    Parameter<T>* param = nullptr;
    bool requires_grad = false;
    bool leaf = false;
    const char* name = "";

    const Mat& value() const { return borrowed != nullptr ? *borrowed : own; }
  };

  Var push(Node node);
  const Node& node(Var v) const;
  bool any_requires_grad(std::initializer_list<Var> vs) const;

  std::vector<Node> nodes_;
};

/// Index of the k smallest entries of `values`, ties broken by index.
std::vector<std::int64_t> smallest_k_indices(std::span<const double> values, std::int64_t k);

/// Number of entries kept by a trim fraction, ceil(fraction * n) with a
/// tolerance so that 0.3 * 10 keeps exactly 3.
std::int64_t trim_count(std::int64_t n, double keep_fraction);

extern template class Graph<float>;
extern template class Graph<double>;

}  // namespace aceg::ad
