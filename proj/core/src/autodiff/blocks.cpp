#include "aceg/autodiff/blocks.hpp"

#include <cmath>

namespace aceg::ad {

template <typename T>
void add_cross_attention_params(ParameterSet<T>& params, const std::string& prefix,
                                const CrossAttentionConfig& cfg) {
  const std::int64_t d = cfg.model_dim;
  const std::int64_t kv = cfg.kv_dim;
  const std::int64_t ff = static_cast<std::int64_t>(cfg.ffn_mult) * d;
  if (cfg.heads < 1 || d % cfg.heads != 0) throw ConfigError("heads must divide model_dim");
  params.add(prefix + "ln_q.gain", {d}).value().setOnes();
  params.add(prefix + "ln_q.bias", {d});
  params.add(prefix + "ln_kv.gain", {kv}).value().setOnes();
  params.add(prefix + "ln_kv.bias", {kv});
  params.add(prefix + "q.weight", {d, d});
  params.add(prefix + "q.bias", {d});
  params.add(prefix + "k.weight", {d, kv});
  params.add(prefix + "k.bias", {d});
  params.add(prefix + "v.weight", {d, kv});
  params.add(prefix + "v.bias", {d});
  params.add(prefix + "o.weight", {d, d});
  params.add(prefix + "o.bias", {d});
  params.add(prefix + "ln_f.gain", {d}).value().setOnes();
  params.add(prefix + "ln_f.bias", {d});
  params.add(prefix + "ffn1.weight", {ff, d});
  params.add(prefix + "ffn1.bias", {ff});
  params.add(prefix + "ffn2.weight", {d, ff});
  params.add(prefix + "ffn2.bias", {d});
}

template <typename T>
CrossAttentionVars bind_cross_attention(Graph<T>& g, ParameterSet<T>& params, const std::string& prefix,
                                        bool trainable) {
  auto p = [&](const char* name) { return g.parameter(params.at(prefix + name), trainable); };
  CrossAttentionVars v;
  v.ln_q_gain = p("ln_q.gain");
  v.ln_q_bias = p("ln_q.bias");
  v.ln_kv_gain = p("ln_kv.gain");
  v.ln_kv_bias = p("ln_kv.bias");
  v.wq = p("q.weight");
  v.bq = p("q.bias");
  v.wk = p("k.weight");
  v.bk = p("k.bias");
  v.wv = p("v.weight");
  v.bv = p("v.bias");
  v.wo = p("o.weight");
  v.bo = p("o.bias");
  v.ln_f_gain = p("ln_f.gain");
  v.ln_f_bias = p("ln_f.bias");
  v.w1 = p("ffn1.weight");
  v.b1 = p("ffn1.bias");
  v.w2 = p("ffn2.weight");
  v.b2 = p("ffn2.bias");
  return v;
}

template <typename T>
Var cross_attention(Graph<T>& g, Var x, Var kv, const CrossAttentionVars& p, int heads) {
  const Var h = g.layer_norm(x, p.ln_q_gain, p.ln_q_bias);
  const Var c = g.layer_norm(kv, p.ln_kv_gain, p.ln_kv_bias);
  const Var q = g.linear(h, p.wq, p.bq);
  const Var k = g.linear(c, p.wk, p.bk);
  const Var v = g.linear(c, p.wv, p.bv);
  const Var a = g.attention(q, k, v, heads);
  x = g.add(x, g.linear(a, p.wo, p.bo));
  const Var f = g.linear(g.gelu(g.linear(g.layer_norm(x, p.ln_f_gain, p.ln_f_bias), p.w1, p.b1)), p.w2, p.b2);
  return g.add(x, f);
}

template <typename T>
void init_linear(Parameter<T>& weight, Parameter<T>& bias, Rng& rng) {
  const auto fan_in = weight.value().cols();
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (Eigen::Index i = 0; i < weight.value().size(); ++i) {
    weight.value().data()[i] = static_cast<T>(uniform(rng, -bound, bound));
  }
  for (Eigen::Index i = 0; i < bias.value().size(); ++i) {
    bias.value().data()[i] = static_cast<T>(uniform(rng, -bound, bound));
  }
}

#define ACEG_INSTANTIATE(T)                                                                           \
  template void add_cross_attention_params<T>(ParameterSet<T>&, const std::string&,                    \
                                              const CrossAttentionConfig&);                            \
  template CrossAttentionVars bind_cross_attention<T>(Graph<T>&, ParameterSet<T>&, const std::string&, \
                                                      bool);                                           \
  template Var cross_attention<T>(Graph<T>&, Var, Var, const CrossAttentionVars&, int);                \
  template void init_linear<T>(Parameter<T>&, Parameter<T>&, Rng&);

ACEG_INSTANTIATE(float)
ACEG_INSTANTIATE(double)
#undef ACEG_INSTANTIATE

}  // namespace aceg::ad
