#include "commands.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "aceg/autodiff/gradcheck.hpp"
#include "aceg/common/binary_io.hpp"
#include "aceg/common/error.hpp"
#include "aceg/regressor/gradcheck_suite.hpp"
#include "aceg/regressor/map_code.hpp"
#include "aceg/synthworld/scene_io.hpp"
#include "experiment.hpp"

namespace aceg::cli {

namespace fs = std::filesystem;

namespace {

void say(const Common& c, const std::string& line) {
  if (!c.quiet) std::printf("%s\n", line.c_str());
}

KeyValues load_if_exists(const fs::path& p) { return fs::exists(p) ? KeyValues::load(p) : KeyValues{}; }

exp::ExperimentConfig resolve_config(const Common& c, const KeyValues& base, const KeyValues& extra = {}) {
  KeyValues kv = base;
  kv.merge(resolve_overrides(c, extra));
  kv.set("workers", c.workers);
  return exp::ExperimentConfig::from_kv(kv);
}

void append_line(const fs::path& p, const std::string& line) {
  std::ofstream f(p, std::ios::app | std::ios::binary);
  if (!f) throw FormatError("cannot append to " + p.string());
  f << line << '\n';
}

reg::Regressor<float> load_model(const fs::path& dir) {
  const auto cfg = reg::RegressorConfig::read(KeyValues::load(dir / "model.kv"));
  return reg::load_regressor(cfg, dir / "model.prm");
}

void save_model(const reg::Regressor<float>& m, const fs::path& dir) {
  KeyValues kv;
  m.config().write(kv);
  kv.save(dir / "model.kv");
  reg::save_regressor(m, dir / "model.prm");
}

maploc::LocalizeResult parse_record(const std::string& line, const fs::path& src) {
  std::istringstream in(line);
  maploc::LocalizeResult r;
  std::string status, t, rot;
  if (!(in >> r.frame >> status >> t >> rot >> r.inliers >> r.correspondences >> r.filtered) ||
      (status != "ok" && status != "fail")) {
    throw FormatError("malformed record in " + src.string() + ": '" + line + "'");
  }
  r.success = status == "ok";
  r.has_gt = true;
  if (r.success) {
    r.error.translation = std::stod(t);
    r.error.rotation_deg = std::stod(rot);
  }
  return r;
}

maploc::Threshold parse_threshold(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw ConfigError("threshold must be 'deg,dist', got '" + s + "'");
  maploc::Threshold t;
  try {
    t.deg = std::stod(s.substr(0, comma));
    t.dist = std::stod(s.substr(comma + 1));
  } catch (const std::exception&) {
    throw ConfigError("threshold must be 'deg,dist', got '" + s + "'");
  }
  if (!(t.deg > 0.0) || !(t.dist > 0.0)) throw ConfigError("thresholds must be positive");
  return t;
}

}  // namespace

fs::path resolve_out(const Common& c, const std::string& command) {
  if (!c.out.empty()) return c.out;
  const char* root = std::getenv("ACEG_OUT_ROOT");
  return fs::path(root && *root ? root : "runs") / command;
}

KeyValues resolve_overrides(const Common& c, const KeyValues& extra) {
  KeyValues kv;
  if (!c.config.empty()) kv = KeyValues::load(c.config);
  for (const auto& s : c.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + s + "'");
    kv.set(s.substr(0, eq), s.substr(eq + 1));
  }
  kv.merge(extra);
  return kv;
}

int cmd_synth(const SynthOptions& o) {
  const auto cfg = resolve_config(o.common, {});
  const auto out = resolve_out(o.common, "synth");
  exp::write_resolved_config(cfg.to_kv(), out);
  const auto m = exp::synthesize(cfg, out);
  const auto digest = fnv1a64(read_file(out / "manifest.kv"));
  say(o.common, "wrote " + std::to_string(m.entries.size()) + " tuples to " + out.string() + " (manifest " +
                    hex64(digest) + ")");
  return 0;
}

int cmd_pretrain(const PretrainOptions& o) {
  if (o.manifest.empty()) throw ConfigError("pretrain: --manifest is required");
  const auto manifest = buf::Manifest::load(o.manifest);
  KeyValues extra;
  if (o.mapping_only) extra.set("pretrain.query_enabled", false);
  const auto cfg = resolve_config(o.common, manifest.meta, extra);
  const auto out = resolve_out(o.common, "pretrain");
  exp::write_resolved_config(cfg.to_kv(), out);

  const auto data = pre::load_dataset(o.manifest, "train");
  pre::Pretrainer tr(data, cfg.pretrain, cfg.model);
  if (!o.resume.empty()) {
    tr.load_state(o.resume);
    say(o.common, "resumed at cycle " + std::to_string(tr.cycle()));
  }
  const auto log_path = out / "log.txt";
  std::int64_t ran = 0;
  while (!tr.done() && (o.max_cycles < 0 || ran < o.max_cycles)) {
    const auto before = tr.log().size();
    tr.run_cycle();
    ++ran;
    if (tr.log().size() > before) {
      append_line(log_path, tr.log().back().to_line());
      say(o.common, tr.log().back().to_line());
    }
  }
  fs::create_directories(out / "state");
  tr.save_state(out / "state");
  save_model(tr.model(), out);
  say(o.common, std::string(tr.done() ? "finished" : "paused") + " at cycle " + std::to_string(tr.cycle()) +
                    "; model " + hex64(fnv1a64(read_file(out / "model.prm"))));
  return 0;
}

int cmd_map(const MapOptions& o) {
  if (o.model.empty() || o.tuple.empty()) throw ConfigError("map: --model and --tuple are required");
  KeyValues preset;
  maploc::mapping_preset(o.preset).write(preset);
  // preset sits between the model's config and the user's overrides
  KeyValues base = load_if_exists(o.model / "config.kv");
  base.merge(preset);
  const auto cfg = resolve_config(o.common, base);
  const auto out = resolve_out(o.common, "map");
  auto kv = cfg.to_kv();
  kv.set("mapping.preset", o.preset);
  exp::write_resolved_config(kv, out);

  auto model = load_model(o.model);
  const auto tuple = world::load_tuple(o.tuple);
  const auto buffer = exp::make_novel_buffer(tuple, cfg);
  const auto log_path = out / "map_log.txt";
  maploc::MappingStats stats;
  const int every = std::max(1, cfg.mapping.iterations / 20);
  const auto code = maploc::map_novel_scene(model, buffer, cfg.mapping, tuple.id, &stats,
                                            [&](int step, double loss, double lr) {
                                              if ((step + 1) % every != 0) return;
                                              char buf[128];
                                              std::snprintf(buf, sizeof buf, "step=%d loss=%.6f lr=%.6g", step + 1,
                                                            loss, lr);
                                              append_line(log_path, buf);
                                            });
  reg::save_map_code(code, out / "code.map");
  say(o.common, "mapped " + tuple.id + ": loss " + std::to_string(stats.first_loss) + " -> " +
                    std::to_string(stats.last_loss) + ", code " + hex64(fnv1a64(read_file(out / "code.map"))));
  return 0;
}

int cmd_localize(const LocalizeOptions& o) {
  if (o.model.empty() || o.code.empty() || o.tuple.empty()) {
    throw ConfigError("localize: --model, --code and --tuple are required");
  }
  KeyValues extra;
  if (o.no_prefilter) extra.set("localize.prefilter", false);
  const auto cfg = resolve_config(o.common, load_if_exists(o.model / "config.kv"), extra);
  const auto out = resolve_out(o.common, "localize");
  auto kv = cfg.to_kv();
  kv.set("localize.set", o.set);
  exp::write_resolved_config(kv, out);

  auto model = load_model(o.model);
  const auto code = reg::load_map_code(o.code);
  if (code.tokens.rows() != model.config().code_tokens || code.tokens.cols() != model.config().code_dim) {
    throw ShapeError("localize: map code shape does not match the model");
  }
  const auto tuple = world::load_tuple(o.tuple);
  const auto& views = exp::views_of(tuple, exp::parse_view_set(o.set));
  const auto report = maploc::evaluate(exp::localize_views(model, code.tokens, views, cfg.localize));
  maploc::write_report(report, out / "metrics.txt", out / "records.txt");
  say(o.common, report.to_table());
  return 0;
}

int cmd_eval(const EvalOptions& o) {
  if (o.records.empty()) throw ConfigError("eval: at least one --records file is required");
  std::vector<maploc::Threshold> th;
  for (const auto& s : o.thresholds) th.push_back(parse_threshold(s));
  if (th.empty()) th = maploc::default_thresholds();
  std::vector<maploc::LocalizeResult> all;
  for (const auto& p : o.records) {
    std::ifstream in(p);
    if (!in) throw FormatError("cannot read " + p.string());
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      all.push_back(parse_record(line, p));
    }
  }
  const auto report = maploc::evaluate(std::move(all), th);
  if (!o.common.out.empty() || std::getenv("ACEG_OUT_ROOT")) {
    const auto out = resolve_out(o.common, "eval");
    KeyValues kv;
    kv.set("eval.records", static_cast<std::int64_t>(o.records.size()));
    for (std::size_t i = 0; i < th.size(); ++i) {
      kv.set("eval.threshold." + std::to_string(i), std::to_string(th[i].deg) + "," + std::to_string(th[i].dist));
    }
    exp::write_resolved_config(kv, out);
    maploc::write_report(report, out / "metrics.txt", out / "records.txt");
  }
  std::printf("%s", report.to_table().c_str());
  return 0;
}

int cmd_gradcheck(const GradcheckOptions& o) {
  ad::GradCheckOptions opts;
  opts.configs = o.configs;
  auto results = ad::run_op_gradchecks(opts);
  const auto more = reg::run_regressor_gradchecks(opts);
  results.insert(results.end(), more.begin(), more.end());
  bool ok = true;
  for (const auto& r : results) {
    std::printf("%-28s configs=%-3d max_rel_err=%.3e %s\n", r.name.c_str(), r.configs, r.max_rel_error,
                r.passed ? "PASS" : "FAIL");
    ok = ok && r.passed;
  }
  std::printf("%s\n", ok ? "all gradients match" : "gradient mismatch");
  return ok ? 0 : 1;
}

}  // namespace aceg::cli
