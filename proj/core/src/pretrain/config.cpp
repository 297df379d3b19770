#include "aceg/pretrain/config.hpp"

#include "aceg/common/error.hpp"

namespace aceg::pre {

void PretrainConfig::validate() const {
  batch.validate();
  if (n_active < 1) throw ConfigError("N_active must be >= 1");
  if (batch.scenes_per_batch > n_active) throw ConfigError("N_spb cannot exceed N_active");
  if (budget_lo < 1 || budget_lo > budget_hi) throw ConfigError("code budget range must satisfy 1 <= lo <= hi");
  if (qstandby < 0) throw ConfigError("N_qstandby must be >= 0");
  if (head_period < 1) throw ConfigError("head-update period must be >= 1");
  if (!(trim > 0.0 && trim <= 1.0)) throw ConfigError("trim fraction must lie in (0, 1]");
  if (iterations < head_period || iterations % head_period != 0) {
    throw ConfigError("iterations must be a positive multiple of the head-update period");
  }
  if (!(lr_net > 0.0 && lr_code > 0.0) || wd_net < 0.0 || wd_code < 0.0) throw ConfigError("bad learning rates");
  if (log_every < 1 || nonfinite_abort < 1) throw ConfigError("log_every and nonfinite_abort must be >= 1");
}

void PretrainConfig::write(KeyValues& kv, const std::string& p) const {
  kv.set(p + "n_active", n_active);
  kv.set(p + "n_spb", batch.scenes_per_batch);
  kv.set(p + "n_pps", batch.patches_per_scene);
  kv.set(p + "qstandby", qstandby);
  kv.set(p + "budget_lo", budget_lo);
  kv.set(p + "budget_hi", budget_hi);
  kv.set(p + "head_period", head_period);
  kv.set(p + "trim", trim);
  kv.set(p + "iterations", iterations);
  kv.set(p + "lr_net", lr_net);
  kv.set(p + "wd_net", wd_net);
  kv.set(p + "lr_code", lr_code);
  kv.set(p + "wd_code", wd_code);
  kv.set(p + "query_enabled", query_enabled);
  kv.set(p + "random_rotation", random_rotation);
  kv.set(p + "log_every", log_every);
  kv.set(p + "nonfinite_abort", nonfinite_abort);
  kv.set(p + "seed", seed);
}

PretrainConfig PretrainConfig::read(const KeyValues& kv, const std::string& p) {
  PretrainConfig c;
  auto i = [&](const char* k, std::int64_t d) { return kv.get_int(p + k, d); };
  c.n_active = static_cast<int>(i("n_active", c.n_active));
  c.batch.scenes_per_batch = static_cast<int>(i("n_spb", c.batch.scenes_per_batch));
  c.batch.patches_per_scene = static_cast<int>(i("n_pps", c.batch.patches_per_scene));
  c.qstandby = static_cast<int>(i("qstandby", c.qstandby));
  c.budget_lo = static_cast<int>(i("budget_lo", c.budget_lo));
  c.budget_hi = static_cast<int>(i("budget_hi", c.budget_hi));
  c.head_period = static_cast<int>(i("head_period", c.head_period));
  c.trim = kv.get_double(p + "trim", c.trim);
  c.iterations = i("iterations", c.iterations);
  c.lr_net = kv.get_double(p + "lr_net", c.lr_net);
  c.wd_net = kv.get_double(p + "wd_net", c.wd_net);
  c.lr_code = kv.get_double(p + "lr_code", c.lr_code);
  c.wd_code = kv.get_double(p + "wd_code", c.wd_code);
  c.query_enabled = kv.get_bool(p + "query_enabled", c.query_enabled);
  c.random_rotation = kv.get_bool(p + "random_rotation", c.random_rotation);
  c.log_every = static_cast<int>(i("log_every", c.log_every));
  c.nonfinite_abort = static_cast<int>(i("nonfinite_abort", c.nonfinite_abort));
  c.seed = static_cast<std::uint64_t>(i("seed", static_cast<std::int64_t>(c.seed)));
  c.validate();
  return c;
}

}  // namespace aceg::pre
