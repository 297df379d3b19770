#pragma once

#include <string>

#include "aceg/autodiff/graph.hpp"
#include "aceg/common/random.hpp"

namespace aceg::ad {

struct CrossAttentionConfig {
  int model_dim = 64;
  int kv_dim = 64;
  int heads = 2;
  int ffn_mult = 4;
};

/// Graph handles for one pre-norm cross-attention block.
struct CrossAttentionVars {
  Var ln_q_gain, ln_q_bias;
  Var ln_kv_gain, ln_kv_bias;
  Var wq, bq, wk, bk, wv, bv, wo, bo;
  Var ln_f_gain, ln_f_bias;
  Var w1, b1, w2, b2;
};

/// Registers the block's parameters under `prefix` (e.g. "blocks.0.").
/// Layer-norm gains start at 1, everything else at zero.
template <typename T>
void add_cross_attention_params(ParameterSet<T>& params, const std::string& prefix,
                                const CrossAttentionConfig& cfg);

template <typename T>
CrossAttentionVars bind_cross_attention(Graph<T>& g, ParameterSet<T>& params, const std::string& prefix,
                                        bool trainable);

/// x <- x + W_o MHA(LN(x), LN(kv)); x <- x + FFN(LN(x)).
///
/// Query tokens are the rows of `x` (n x model_dim); key/value tokens are the
/// rows of `kv` (m x kv_dim) and carry no positional encoding, so the result
/// does not depend on the order of the kv rows.
template <typename T>
Var cross_attention(Graph<T>& g, Var x, Var kv, const CrossAttentionVars& p, int heads);

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialization for a linear layer.
template <typename T>
void init_linear(Parameter<T>& weight, Parameter<T>& bias, Rng& rng);

}  // namespace aceg::ad
