#pragma once

#include <cstdint>
#include <string>

#include "aceg/buffers/batch.hpp"
#include "aceg/common/kv.hpp"

namespace aceg::pre {

struct PretrainConfig {
  int n_active = 16;
  buf::BatchSpec batch{8, 128};
  int qstandby = 150;        // mapping iterations before a code may serve query batches
  int budget_lo = 300;       // per-code mapping-iteration budget, drawn uniformly
  int budget_hi = 500;
  int head_period = 10;      // mapping iterations per cycle; the last one updates the head
  double trim = 0.3;         // fraction of lowest losses kept
  std::int64_t iterations = 50'000;  // total mapping (code) iterations; a multiple of head_period
  double lr_net = 1e-3;
  double wd_net = 0.01;
  double lr_code = 1e-2;
  double wd_code = 0.0;
  bool query_enabled = true;
  bool random_rotation = true;  // rotate targets of every incoming pool scene
  int log_every = 100;          // cycles per aggregated log record
  int nonfinite_abort = 10;     // consecutive non-finite steps before giving up
  std::uint64_t seed = 0;

  std::int64_t cycles() const { return iterations / head_period; }
  void validate() const;
  void write(KeyValues& kv, const std::string& prefix = "pretrain.") const;
  static PretrainConfig read(const KeyValues& kv, const std::string& prefix = "pretrain.");
};

}  // namespace aceg::pre
