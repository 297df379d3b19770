#include <CLI11.hpp>
#include <cstdio>

#include "aceg/common/error.hpp"
#include "commands.hpp"

using namespace aceg::cli;

namespace {

void add_common(CLI::App* app, Common& c) {
  app->add_option("-o,--out", c.out, "output directory (default $ACEG_OUT_ROOT/<command>)");
  app->add_option("-c,--config", c.config, "key-value config file")->check(CLI::ExistingFile);
  app->add_option("--set", c.sets, "override a config key, key=value (repeatable)");
  app->add_option("--workers", c.workers, "parallelism cap; 1 is bit-reproducible")->check(CLI::PositiveNumber);
  app->add_flag("-q,--quiet", c.quiet, "only errors");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"aceg: scene-coordinate regression with learned map codes on a synthetic world"};
  app.require_subcommand(1);

  SynthOptions synth;
  auto* s = app.add_subcommand("synth", "generate scene tuples, buffers and a manifest");
  add_common(s, synth.common);

  PretrainOptions pre;
  auto* p = app.add_subcommand("pretrain", "pre-train the regressor over the train tuples");
  add_common(p, pre.common);
  p->add_option("-m,--manifest", pre.manifest, "manifest.kv from synth")->required()->check(CLI::ExistingFile);
  p->add_flag("--mapping-only", pre.mapping_only, "disable query iterations");
  p->add_option("--resume", pre.resume, "state directory of an earlier run")->check(CLI::ExistingDirectory);
  p->add_option("--max-cycles", pre.max_cycles, "stop after this many cycles and save state");

  MapOptions map;
  auto* m = app.add_subcommand("map", "fit a map code to a held-out tuple's mapping views");
  add_common(m, map.common);
  m->add_option("--model", map.model, "pretrain output directory")->required()->check(CLI::ExistingDirectory);
  m->add_option("--tuple", map.tuple, "tuple .scn file")->required()->check(CLI::ExistingFile);
  m->add_option("--preset", map.preset, "fast|thorough")->check(CLI::IsMember({"fast", "thorough"}));

  LocalizeOptions loc;
  auto* l = app.add_subcommand("localize", "localize a tuple's views against a map code");
  add_common(l, loc.common);
  l->add_option("--model", loc.model, "pretrain output directory")->required()->check(CLI::ExistingDirectory);
  l->add_option("--code", loc.code, "map code file")->required()->check(CLI::ExistingFile);
  l->add_option("--tuple", loc.tuple, "tuple .scn file")->required()->check(CLI::ExistingFile);
  l->add_option("--views", loc.set, "mapping|query|control")->check(CLI::IsMember({"mapping", "query", "control"}));
  l->add_flag("--no-prefilter", loc.no_prefilter, "skip uncertainty prefiltering");

  EvalOptions ev;
  auto* e = app.add_subcommand("eval", "aggregate per-frame records into a metrics table");
  add_common(e, ev.common);
  e->add_option("records", ev.records, "records files")->required()->check(CLI::ExistingFile);
  e->add_option("-t,--threshold", ev.thresholds, "deg,dist (repeatable)");

  GradcheckOptions gc;
  auto* g = app.add_subcommand("gradcheck", "compare analytic and finite-difference gradients");
  add_common(g, gc.common);
  g->add_option("--configs", gc.configs, "random configurations per op")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (s->parsed()) return cmd_synth(synth);
    if (p->parsed()) return cmd_pretrain(pre);
    if (m->parsed()) return cmd_map(map);
    if (l->parsed()) return cmd_localize(loc);
    if (e->parsed()) return cmd_eval(ev);
    if (g->parsed()) return cmd_gradcheck(gc);
  } catch (const aceg::Error& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 2;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 2;
  }
  return 1;
}
