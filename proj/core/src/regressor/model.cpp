#include "aceg/regressor/model.hpp"

#include "aceg/autodiff/checkpoint.hpp"
#include "aceg/common/error.hpp"

namespace aceg::reg {

namespace {

ad::CrossAttentionConfig block_config(const RegressorConfig& c) {
  return {c.model_dim, c.code_dim, c.heads, c.ffn_mult};
}

std::string block_prefix(int i) { return "blocks." + std::to_string(i) + "."; }

}  // namespace

void RegressorConfig::validate() const {
  if (feat_dim < 1 || model_dim < 2 || blocks < 1 || head_hidden < 1 || code_tokens < 1 || code_dim < 2 ||
      ffn_mult < 1) {
    throw ConfigError("regressor dimensions must be positive (model_dim, code_dim >= 2)");
  }
  if (heads < 1 || model_dim % heads != 0) throw ConfigError("regressor heads must divide model_dim");
}

void RegressorConfig::write(KeyValues& kv, const std::string& prefix) const {
  kv.set(prefix + "feat_dim", feat_dim);
  kv.set(prefix + "model_dim", model_dim);
  kv.set(prefix + "blocks", blocks);
  kv.set(prefix + "heads", heads);
  kv.set(prefix + "ffn_mult", ffn_mult);
  kv.set(prefix + "head_hidden", head_hidden);
  kv.set(prefix + "code_tokens", code_tokens);
  kv.set(prefix + "code_dim", code_dim);
}

RegressorConfig RegressorConfig::read(const KeyValues& kv, const std::string& prefix) {
  RegressorConfig c;
  auto get = [&](const char* k, int fallback) {
    return static_cast<int>(kv.get_int(prefix + k, fallback));
  };
  c.feat_dim = get("feat_dim", c.feat_dim);
  c.model_dim = get("model_dim", c.model_dim);
  c.blocks = get("blocks", c.blocks);
  c.heads = get("heads", c.heads);
  c.ffn_mult = get("ffn_mult", c.ffn_mult);
  c.head_hidden = get("head_hidden", c.head_hidden);
  c.code_tokens = get("code_tokens", c.code_tokens);
  c.code_dim = get("code_dim", c.code_dim);
  c.validate();
  return c;
}

template <typename T>
Regressor<T>::Regressor(RegressorConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  params_.add("input.weight", {cfg_.model_dim, cfg_.feat_dim});
  params_.add("input.bias", {cfg_.model_dim});
  for (int i = 0; i < cfg_.blocks; ++i) ad::add_cross_attention_params(params_, block_prefix(i), block_config(cfg_));
  params_.add("head.fc1.weight", {cfg_.head_hidden, cfg_.model_dim});
  params_.add("head.fc1.bias", {cfg_.head_hidden});
  params_.add("head.fc2.weight", {4, cfg_.head_hidden});
  params_.add("head.fc2.bias", {4});
}

template <typename T>
Regressor<T> Regressor<T>::init(const RegressorConfig& cfg, std::uint64_t seed) {
  Regressor<T> m(cfg);
  Rng rng = make_rng(seed, {0x7468657461ULL});
  auto& P = m.params_;
  ad::init_linear(P.at("input.weight"), P.at("input.bias"), rng);
  for (int i = 0; i < cfg.blocks; ++i) {
    const auto pre = block_prefix(i);
    for (const char* name : {"q", "k", "v", "o", "ffn1", "ffn2"}) {
      ad::init_linear(P.at(pre + name + ".weight"), P.at(pre + name + ".bias"), rng);
    }
  }
  ad::init_linear(P.at("head.fc1.weight"), P.at("head.fc1.bias"), rng);
  ad::init_linear(P.at("head.fc2.weight"), P.at("head.fc2.bias"), rng);
  return m;
}

template <typename T>
ad::Var Regressor<T>::forward(ad::Graph<T>& g, ad::Var embeddings, ad::Var code, bool trainable) {
  const auto& E = g.value(embeddings);
  const auto& C = g.value(code);
  if (E.cols() != cfg_.feat_dim) {
    throw ShapeError("embedding width " + std::to_string(E.cols()) + " != feat_dim " + std::to_string(cfg_.feat_dim));
  }
  if (C.cols() != cfg_.code_dim || C.rows() < 1) {
    throw ShapeError("map code is " + std::to_string(C.rows()) + "x" + std::to_string(C.cols()) + ", expected Nx" +
                     std::to_string(cfg_.code_dim));
  }
  auto p = [&](const char* name) { return g.parameter(params_.at(name), trainable); };
  ad::Var x = g.linear(embeddings, p("input.weight"), p("input.bias"));
  for (int i = 0; i < cfg_.blocks; ++i) {
    const auto vars = ad::bind_cross_attention(g, params_, block_prefix(i), trainable);
    x = ad::cross_attention(g, x, code, vars, cfg_.heads);
  }
  const ad::Var h = g.gelu(g.linear(x, p("head.fc1.weight"), p("head.fc1.bias")));
  return g.linear(h, p("head.fc2.weight"), p("head.fc2.bias"));
}

template <typename T>
std::vector<CoordPrediction> Regressor<T>::regress_batch(const ad::Matrix<T>& embeddings, const ad::Matrix<T>& code) {
  ad::Graph<T> g;
  const auto e = g.constant(embeddings);
  const auto c = g.constant(code);
  const auto& out = g.value(forward(g, e, c, false));
  std::vector<CoordPrediction> preds(static_cast<std::size_t>(out.rows()));
  for (Eigen::Index r = 0; r < out.rows(); ++r) preds[r] = decode_output(out.row(r));
  return preds;
}

template <typename T>
CoordPrediction Regressor<T>::regress(const Eigen::Ref<const Eigen::Matrix<T, Eigen::Dynamic, 1>>& e,
                                      const ad::Matrix<T>& code) {
  ad::Matrix<T> row = e.transpose();
  return regress_batch(row, code).front();
}

void save_regressor(const Regressor<float>& model, const std::filesystem::path& path) {
  ad::save_parameters(model.params(), path);
}

Regressor<float> load_regressor(const RegressorConfig& cfg, const std::filesystem::path& path) {
  Regressor<float> m(cfg);
  ad::load_parameters(path, m.params());
  return m;
}

template class Regressor<float>;
template class Regressor<double>;

}  // namespace aceg::reg
