#include "aceg/pretrain/pretrainer.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "aceg/autodiff/checkpoint.hpp"
#include "aceg/buffers/buffer_io.hpp"
#include "aceg/buffers/manifest.hpp"
#include "aceg/common/error.hpp"
#include "aceg/regressor/losses.hpp"
#include "aceg/synthworld/augment.hpp"

namespace aceg::pre {

namespace {

enum Stream : std::uint64_t { kTheta = 1, kPoolInit, kCycle };

using Mat = ad::Matrix<float>;

struct BatchGraph {
  ad::Var loss;
  std::vector<ad::Var> codes;  // one per group
};

// Gathers each group's records, regresses them against that group's own
// code and reduces all per-record losses with one batch-wide trim.
BatchGraph build_objective(ad::Graph<float>& g, reg::Regressor<float>& model, const buf::Batch& batch,
                           const std::vector<buf::PretrainBuffer>& buffers, const std::vector<ActiveScene>& pool,
                           bool codes_trainable, bool net_trainable, double trim) {
  BatchGraph out;
  std::vector<ad::Var> losses;
  for (const auto& group : batch.groups) {
    const auto& slot = pool.at(static_cast<std::size_t>(group.slot));
    const auto& b = buffers.at(static_cast<std::size_t>(slot.tuple));
    const auto n = static_cast<Eigen::Index>(group.rows.size());
    Mat E(n, b.embeddings.cols());
    Mat Y(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
      E.row(i) = b.embeddings.row(group.rows[i]);
      Y.row(i) = b.points.row(group.rows[i]);
    }
    Y = (Y * slot.rotation.transpose()).eval();
    const auto code = codes_trainable ? g.variable(slot.code) : g.constant(slot.code);
    out.codes.push_back(code);
    const auto pred = model.forward(g, g.constant(std::move(E)), code, net_trainable);
    losses.push_back(reg::laplace_nll_3d_rows(g, pred, Y));
  }
  out.loss = g.trimmed_mean(g.concat_rows(losses), trim);
  return out;
}

bool params_finite(const ad::ParameterSet<float>& ps) {
  for (const auto& p : ps) {
    if (!p.grad.allFinite()) return false;
  }
  return true;
}

std::string slot_list(const buf::Batch& batch, const std::vector<ActiveScene>& pool,
                      const std::vector<buf::PretrainBuffer>& buffers) {
  std::string s;
  for (const auto& g : batch.groups) {
    if (!s.empty()) s += ",";
    s += buffers.at(static_cast<std::size_t>(pool.at(static_cast<std::size_t>(g.slot)).tuple)).scene_id;
  }
  return s;
}

}  // namespace

void PretrainDataset::validate() const {
  if (mapping.empty() || mapping.size() != query.size()) {
    throw PreconditionError("pretrain dataset needs one M and one Q buffer per tuple");
  }
  for (std::size_t i = 0; i < mapping.size(); ++i) {
    if (mapping[i].size() < 1 || query[i].size() < 1) throw PreconditionError("empty buffer in pretrain dataset");
    if (mapping[i].embeddings.cols() != query[i].embeddings.cols() ||
        mapping[i].embeddings.cols() != mapping[0].embeddings.cols()) {
      throw ShapeError("pretrain buffers disagree on embedding width");
    }
  }
}

std::string LogRecord::to_line() const {
  char buf[256];
  std::snprintf(buf, sizeof buf, "cycle=%lld map_iter=%lld mapping_nll=%.6f query_nll=%.6f eligible=%d lr_net=%.3g lr_code=%.3g",
                static_cast<long long>(cycle), static_cast<long long>(mapping_iterations), mapping_nll, query_nll,
                eligible, lr_net, lr_code);
  std::string s = buf;
  if (!notes.empty()) s += " notes=" + notes;
  return s;
}

Pretrainer::Pretrainer(const PretrainDataset& data, PretrainConfig cfg, reg::RegressorConfig model_cfg)
    : data_(data), cfg_(cfg), net_opt_(ad::AdamWConfig{0.9, 0.999, 1e-8, cfg.wd_net}) {
  cfg_.validate();
  data_.validate();
  if (static_cast<int>(data_.size()) < cfg_.n_active) {
    throw PreconditionError("dataset has " + std::to_string(data_.size()) + " tuples, N_active is " +
                            std::to_string(cfg_.n_active));
  }
  if (model_cfg.feat_dim != data_.mapping[0].embeddings.cols()) {
    throw ConfigError("model feat_dim does not match buffer embedding width");
  }
  model_ = reg::Regressor<float>::init(model_cfg, derive_seed(cfg_.seed, {kTheta}));
  Rng rng = make_rng(cfg_.seed, {kPoolInit});
  for (int i = 0; i < cfg_.n_active; ++i) pool_.push_back(fresh_slot(rng));
}

ActiveScene Pretrainer::fresh_slot(Rng& rng) {
  ActiveScene s;
  s.tuple = static_cast<int>(uniform_int(rng, 0, static_cast<std::int64_t>(data_.size()) - 1));
  const auto& mc = model_.config();
  s.code = reg::init_map_code(mc.code_tokens, mc.code_dim, rng()).tokens;
  s.budget = static_cast<int>(uniform_int(rng, cfg_.budget_lo, cfg_.budget_hi));
  if (cfg_.random_rotation) s.rotation = world::random_rotation(rng).cast<float>();
  budgets_.push_back(s.budget);
  return s;
}

std::vector<int> Pretrainer::mapping_eligible() const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(pool_.size()); ++i) {
    if (!pool_[i].exhausted()) out.push_back(i);
  }
  return out;
}

std::vector<int> Pretrainer::query_eligible() const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(pool_.size()); ++i) {
    if (pool_[i].counter >= cfg_.qstandby) out.push_back(i);
  }
  return out;
}

std::vector<std::int64_t> Pretrainer::buffer_sizes(bool query) const {
  std::vector<std::int64_t> sizes;
  for (const auto& s : pool_) sizes.push_back((query ? data_.query : data_.mapping).at(s.tuple).size());
  return sizes;
}

void Pretrainer::record_nonfinite(const buf::Batch& batch, const std::string& what) {
  ++stats_.nonfinite_events;
  win_notes_ += (win_notes_.empty() ? "" : ";") + what + "[" + slot_list(batch, pool_, data_.mapping) + "]";
  if (++nonfinite_streak_ > cfg_.nonfinite_abort) {
    throw NonFiniteError("pretrain: " + std::to_string(nonfinite_streak_) + " consecutive non-finite steps");
  }
}

StepResult Pretrainer::mapping_iteration(const buf::Batch& batch, bool update_head) {
  StepResult r;
  r.scenes = static_cast<int>(batch.groups.size());
  if (batch.groups.empty()) {
    r.note = "empty-batch";
    return r;
  }
  for (const auto& g : batch.groups) {
    if (pool_.at(static_cast<std::size_t>(g.slot)).exhausted()) throw PreconditionError("batch uses an exhausted code");
  }
  std::vector<Mat> code_grads;
  try {
    ad::Graph<float> g;
    if (update_head) model_.params().zero_grad();
    auto bg = build_objective(g, model_, batch, data_.mapping, pool_, true, update_head, cfg_.trim);
    g.backward(bg.loss);
    r.loss = g.value(bg.loss)(0, 0);
    for (auto v : bg.codes) code_grads.push_back(g.grad(v));
  } catch (const NonFiniteError& e) {
    record_nonfinite(batch, "map-nonfinite");
    r.note = e.what();
    return r;
  }
  bool finite = !update_head || params_finite(model_.params());
  for (const auto& cg : code_grads) finite = finite && cg.allFinite();
  if (!finite) {
    record_nonfinite(batch, "map-grad-nonfinite");
    r.note = "non-finite gradient";
    return r;
  }
  nonfinite_streak_ = 0;
  const ad::AdamWConfig code_cfg{0.9, 0.999, 1e-8, cfg_.wd_code};
  for (std::size_t i = 0; i < batch.groups.size(); ++i) {
    auto& slot = pool_[static_cast<std::size_t>(batch.groups[i].slot)];
    ad::adamw_step(slot.code, code_grads[i], slot.code_state, code_cfg, cfg_.lr_code);
    ++slot.counter;
  }
  if (update_head) {
    net_opt_.step(model_.params(), cfg_.lr_net);
    ++stats_.mapping_head_steps;
  }
  ++stats_.mapping_iterations;
  r.ok = true;
  return r;
}

StepResult Pretrainer::query_iteration(const buf::Batch& batch) {
  StepResult r;
  r.scenes = static_cast<int>(batch.groups.size());
  if (batch.groups.empty()) {
    r.note = "no-eligible-scenes";
    return r;
  }
  for (const auto& g : batch.groups) {
    if (pool_.at(static_cast<std::size_t>(g.slot)).counter < cfg_.qstandby) {
      throw PreconditionError("query batch uses a scene below N_qstandby");
    }
  }
  try {
    ad::Graph<float> g;
    model_.params().zero_grad();
    auto bg = build_objective(g, model_, batch, data_.query, pool_, false, true, cfg_.trim);
    g.backward(bg.loss);
    r.loss = g.value(bg.loss)(0, 0);
  } catch (const NonFiniteError& e) {
    record_nonfinite(batch, "query-nonfinite");
    r.note = e.what();
    return r;
  }
  if (!params_finite(model_.params())) {
    record_nonfinite(batch, "query-grad-nonfinite");
    r.note = "non-finite gradient";
    return r;
  }
  nonfinite_streak_ = 0;
  net_opt_.step(model_.params(), cfg_.lr_net);
  ++stats_.query_head_steps;
  r.ok = true;
  return r;
}

float Pretrainer::evaluate(const buf::Batch& batch, bool query_buffers) {
  ad::Graph<float> g;
  auto bg = build_objective(g, model_, batch, query_buffers ? data_.query : data_.mapping, pool_, false, false,
                            cfg_.trim);
  return g.value(bg.loss)(0, 0);
}

void Pretrainer::rotate_pool(Rng& rng) {
  for (auto& slot : pool_) {
    if (!slot.exhausted()) continue;
    const auto gen = slot.generation + 1;
    slot = fresh_slot(rng);
    slot.generation = gen;
    ++stats_.refills;
  }
}

buf::Batch Pretrainer::draw_batch(const std::vector<int>& eligible, Rng& rng, std::string& note) {
  buf::BatchSpec spec = cfg_.batch;
  if (static_cast<int>(eligible.size()) < spec.scenes_per_batch) {
    spec.scenes_per_batch = static_cast<int>(eligible.size());
    ++stats_.shrunk_batches;
    note = "nspb=" + std::to_string(spec.scenes_per_batch);
    if (spec.scenes_per_batch == 0) return {};
  }
  return buf::sample_batch(eligible, buffer_sizes(false), spec, rng);
}

void Pretrainer::run_cycle() {
  if (done()) return;
  Rng rng = make_rng(cfg_.seed, {kCycle, static_cast<std::uint64_t>(cycle_)});
  for (int k = 0; k < cfg_.head_period; ++k) {
    std::string note;
    const auto batch = draw_batch(mapping_eligible(), rng, note);
    if (!note.empty() && win_notes_.find(note) == std::string::npos) {
      win_notes_ += (win_notes_.empty() ? "" : ";") + note;
    }
    const auto res = mapping_iteration(batch, k == cfg_.head_period - 1);
    if (res.ok) {
      win_map_sum_ += res.loss;
      ++win_map_n_;
    }
  }
  if (cfg_.query_enabled) {
    const auto eligible = query_eligible();
    if (eligible.empty()) {
      ++stats_.query_skipped;
    } else {
      buf::BatchSpec spec = cfg_.batch;
      spec.scenes_per_batch = std::min<int>(spec.scenes_per_batch, static_cast<int>(eligible.size()));
      const auto batch = buf::sample_batch(eligible, buffer_sizes(true), spec, rng);
      const auto res = query_iteration(batch);
      if (res.ok) {
        win_query_sum_ += res.loss;
        ++win_query_n_;
      }
    }
  }
  rotate_pool(rng);
  ++cycle_;

  if (cycle_ % cfg_.log_every == 0 || done()) {
    LogRecord rec;
    rec.cycle = cycle_;
    rec.mapping_iterations = stats_.mapping_iterations;
    rec.mapping_nll = win_map_n_ > 0 ? win_map_sum_ / static_cast<double>(win_map_n_) : std::nan("");
    rec.query_nll = win_query_n_ > 0 ? win_query_sum_ / static_cast<double>(win_query_n_) : std::nan("");
    rec.eligible = static_cast<int>(query_eligible().size());
    rec.lr_net = cfg_.lr_net;
    rec.lr_code = cfg_.lr_code;
    rec.notes = win_notes_;
    log_.push_back(rec);
    win_map_sum_ = win_query_sum_ = 0.0;
    win_map_n_ = win_query_n_ = 0;
    win_notes_.clear();
  }
}

void Pretrainer::run(const std::function<void(const LogRecord&)>& on_log) {
  while (!done()) {
    const auto before = log_.size();
    run_cycle();
    if (on_log && log_.size() > before) on_log(log_.back());
  }
}

void Pretrainer::save_state(const std::filesystem::path& dir) const {
  std::vector<ad::NamedTensor> ts;
  auto add = [&](const std::string& name, const Mat& m) {
    ad::NamedTensor t;
    t.name = name;
    t.tensor.shape = {m.rows(), m.cols()};
    t.tensor.values = m;
    ts.push_back(std::move(t));
  };
  KeyValues kv;
  const auto& params = model_.params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    add("theta." + p.name, p.value());
    const auto& st = i < net_opt_.states().size() ? net_opt_.states()[i] : ad::AdamWState<float>{};
    add("theta_m." + p.name, st.m.size() ? st.m : Mat::Zero(p.value().rows(), p.value().cols()));
    add("theta_v." + p.name, st.v.size() ? st.v : Mat::Zero(p.value().rows(), p.value().cols()));
    kv.set("theta_step." + std::to_string(i), st.step);
  }
  for (std::size_t i = 0; i < pool_.size(); ++i) {
    const auto& s = pool_[i];
    const auto pre = "pool." + std::to_string(i) + ".";
    add(pre + "code", s.code);
    add(pre + "m", s.code_state.m.size() ? s.code_state.m : Mat::Zero(s.code.rows(), s.code.cols()));
    add(pre + "v", s.code_state.v.size() ? s.code_state.v : Mat::Zero(s.code.rows(), s.code.cols()));
    Mat rot = s.rotation;
    add(pre + "rotation", rot);
    kv.set(pre + "tuple", s.tuple);
    kv.set(pre + "counter", s.counter);
    kv.set(pre + "budget", s.budget);
    kv.set(pre + "generation", s.generation);
    kv.set(pre + "step", s.code_state.step);
  }
  kv.set("cycle", cycle_);
  kv.set("pool_size", static_cast<std::int64_t>(pool_.size()));
  kv.set("stats.mapping_iterations", stats_.mapping_iterations);
  kv.set("stats.mapping_head_steps", stats_.mapping_head_steps);
  kv.set("stats.query_head_steps", stats_.query_head_steps);
  kv.set("stats.query_skipped", stats_.query_skipped);
  kv.set("stats.shrunk_batches", stats_.shrunk_batches);
  kv.set("stats.nonfinite_events", stats_.nonfinite_events);
  kv.set("stats.refills", stats_.refills);
  kv.set("dataset_size", static_cast<std::int64_t>(data_.size()));
  cfg_.write(kv);
  model_.config().write(kv);
  write_file(dir / "state.prm", ad::encode_tensors(ts));
  kv.save(dir / "state.kv");
}

void Pretrainer::load_state(const std::filesystem::path& dir) {
  const auto kv = KeyValues::load(dir / "state.kv");
  if (kv.get_int("dataset_size") != static_cast<std::int64_t>(data_.size())) {
    throw ConfigError("saved state was produced on a different dataset");
  }
  if (kv.get_int("pool_size") != cfg_.n_active) throw ConfigError("saved state has a different pool size");
  const auto ts = ad::decode_tensors(read_file(dir / "state.prm"));
  std::size_t at = 0;
  auto next = [&](const std::string& name, Eigen::Index rows, Eigen::Index cols) -> const Mat& {
    if (at >= ts.size() || ts[at].name != name || ts[at].tensor.values.rows() != rows ||
        ts[at].tensor.values.cols() != cols) {
      throw FormatError("saved state: expected tensor '" + name + "'");
    }
    return ts[at++].tensor.values;
  };
  auto& params = model_.params();
  auto& states = net_opt_.states();
  states.assign(params.size(), {});
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    const auto r = p.value().rows(), c = p.value().cols();
    p.value() = next("theta." + p.name, r, c);
    states[i].m = next("theta_m." + p.name, r, c);
    states[i].v = next("theta_v." + p.name, r, c);
    states[i].step = kv.get_int("theta_step." + std::to_string(i));
    if (states[i].step == 0) states[i] = {};
  }
  const auto& mc = model_.config();
  for (std::size_t i = 0; i < pool_.size(); ++i) {
    auto& s = pool_[i];
    const auto pre = "pool." + std::to_string(i) + ".";
    s.code = next(pre + "code", mc.code_tokens, mc.code_dim);
    s.code_state.m = next(pre + "m", mc.code_tokens, mc.code_dim);
    s.code_state.v = next(pre + "v", mc.code_tokens, mc.code_dim);
    s.rotation = next(pre + "rotation", 3, 3);
    s.code_state.step = kv.get_int(pre + "step");
    if (s.code_state.step == 0) s.code_state = {};
    s.tuple = static_cast<int>(kv.get_int(pre + "tuple"));
    s.counter = static_cast<int>(kv.get_int(pre + "counter"));
    s.budget = static_cast<int>(kv.get_int(pre + "budget"));
    s.generation = static_cast<std::uint64_t>(kv.get_int(pre + "generation"));
    if (s.tuple < 0 || s.tuple >= static_cast<int>(data_.size())) throw FormatError("saved state: bad tuple index");
  }
  if (at != ts.size()) throw FormatError("saved state has trailing tensors");
  cycle_ = kv.get_int("cycle");
  stats_.mapping_iterations = kv.get_int("stats.mapping_iterations");
  stats_.mapping_head_steps = kv.get_int("stats.mapping_head_steps");
  stats_.query_head_steps = kv.get_int("stats.query_head_steps");
  stats_.query_skipped = kv.get_int("stats.query_skipped");
  stats_.shrunk_batches = kv.get_int("stats.shrunk_batches");
  stats_.nonfinite_events = kv.get_int("stats.nonfinite_events");
  stats_.refills = kv.get_int("stats.refills");
  log_.clear();
  win_map_sum_ = win_query_sum_ = 0.0;
  win_map_n_ = win_query_n_ = 0;
  win_notes_.clear();
}

PretrainDataset load_dataset(const std::filesystem::path& manifest_path, const std::string& split) {
  const auto m = buf::Manifest::load(manifest_path);
  const auto base = manifest_path.parent_path();
  PretrainDataset d;
  for (const auto* e : m.with_split(split)) {
    d.mapping.push_back(buf::load_pretrain_buffer(base / e->mapping));
    d.query.push_back(buf::load_pretrain_buffer(base / e->query));
  }
  d.validate();
  return d;
}

}  // namespace aceg::pre
