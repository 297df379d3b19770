#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "aceg/common/kv.hpp"

namespace aceg::cli {

/// Options shared by every subcommand.
struct Common {
  std::filesystem::path out;          // empty: $ACEG_OUT_ROOT/<command>, else ./runs/<command>
  std::filesystem::path config;       // optional key-value file
  std::vector<std::string> sets;      // key=value overrides, applied last
  int workers = 1;
  bool quiet = false;
};

/// Output directory for `command` under the default root unless given.
std::filesystem::path resolve_out(const Common& c, const std::string& command);

/// config file, then --set overrides, then the explicit `extra` entries.
KeyValues resolve_overrides(const Common& c, const KeyValues& extra = {});

struct SynthOptions {
  Common common;
};

struct PretrainOptions {
  Common common;
  std::filesystem::path manifest;
  bool mapping_only = false;
  std::filesystem::path resume;  // directory holding state.prm/state.kv
  std::int64_t max_cycles = -1;  // stop early (still saves state)
};

struct MapOptions {
  Common common;
  std::filesystem::path model;  // directory with model.prm and model.kv
  std::filesystem::path tuple;  // .scn file
  std::string preset = "fast";
};

struct LocalizeOptions {
  Common common;
  std::filesystem::path model;
  std::filesystem::path code;
  std::filesystem::path tuple;
  std::string set = "query";
  bool no_prefilter = false;
};

struct EvalOptions {
  Common common;
  std::vector<std::filesystem::path> records;
  std::vector<std::string> thresholds;  // "deg,dist"
};

struct GradcheckOptions {
  Common common;
  int configs = 20;
};

int cmd_synth(const SynthOptions& o);
int cmd_pretrain(const PretrainOptions& o);
int cmd_map(const MapOptions& o);
int cmd_localize(const LocalizeOptions& o);
int cmd_eval(const EvalOptions& o);
int cmd_gradcheck(const GradcheckOptions& o);

}  // namespace aceg::cli
