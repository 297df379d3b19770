#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "aceg/autodiff/optim.hpp"
#include "aceg/buffers/batch.hpp"
#include "aceg/buffers/buffers.hpp"
#include "aceg/pretrain/config.hpp"
#include "aceg/regressor/model.hpp"

namespace aceg::pre {

/// Mapping (M) and query (Q) buffers of every training tuple, index-aligned.
struct PretrainDataset {
  std::vector<buf::PretrainBuffer> mapping;
  std::vector<buf::PretrainBuffer> query;

  std::size_t size() const { return mapping.size(); }
  void validate() const;
};

/// One slot of the active pool.
struct ActiveScene {
  int tuple = -1;
  ad::Matrix<float> code;
  ad::AdamWState<float> code_state;
  int counter = 0;  // mapping iterations this code has received
  int budget = 0;
  Eigen::Matrix3f rotation = Eigen::Matrix3f::Identity();  // applied to targets
  std::uint64_t generation = 0;                            // slot refills so far

  bool exhausted() const { return counter >= budget; }
};

struct StepResult {
  bool ok = false;            // false: skipped or aborted
  float loss = std::numeric_limits<float>::quiet_NaN();
  int scenes = 0;             // scenes in the batch
  std::string note;
};

/// Aggregate over `log_every` cycles.
struct LogRecord {
  std::int64_t cycle = 0;           // last cycle covered
  std::int64_t mapping_iterations = 0;
  double mapping_nll = 0.0;         // mean trimmed loss over the window
  double query_nll = std::numeric_limits<double>::quiet_NaN();
  int eligible = 0;                 // query-eligible slots at the end of the window
  double lr_net = 0.0;
  double lr_code = 0.0;
  std::string notes;

  std::string to_line() const;
};

struct ScheduleStats {
  std::int64_t mapping_iterations = 0;  // code steps
  std::int64_t mapping_head_steps = 0;
  std::int64_t query_head_steps = 0;
  std::int64_t query_skipped = 0;
  std::int64_t shrunk_batches = 0;
  std::int64_t nonfinite_events = 0;
  std::int64_t refills = 0;
};

/// Alternating mapping/query pre-training over a rotating pool of scenes.
///
/// One cycle is (period - 1) mapping iterations without head update, one
/// mapping iteration that also updates the head, then one query iteration
/// (if enabled). Randomness for cycle c comes from derive_seed(seed, c), so
/// a run resumed from a saved state continues bit-identically.
class Pretrainer {
 public:
  Pretrainer(const PretrainDataset& data, PretrainConfig cfg, reg::RegressorConfig model_cfg);

  const PretrainConfig& config() const { return cfg_; }
  reg::Regressor<float>& model() { return model_; }
  const reg::Regressor<float>& model() const { return model_; }
  std::vector<ActiveScene>& pool() { return pool_; }
  const std::vector<ActiveScene>& pool() const { return pool_; }
  const ScheduleStats& stats() const { return stats_; }
  const std::vector<LogRecord>& log() const { return log_; }
  const std::vector<int>& budget_history() const { return budgets_; }
  std::int64_t cycle() const { return cycle_; }
  bool done() const { return cycle_ >= cfg_.cycles(); }

  /// Slots whose code may still receive mapping iterations.
  std::vector<int> mapping_eligible() const;
  /// Slots whose code has had at least N_qstandby mapping iterations.
  std::vector<int> query_eligible() const;

  /// Trimmed 3D NLL over a batch from the M buffers; codes always step, the
  /// head only when `update_head`. Counters of batch scenes are incremented.
  StepResult mapping_iteration(const buf::Batch& batch, bool update_head);
  /// Same objective on Q buffers with codes held constant; only the head
  /// steps. Requires every batch slot to be query-eligible.
  StepResult query_iteration(const buf::Batch& batch);
  /// Replaces every exhausted slot with a freshly drawn tuple, a new code,
  /// budget and rotation.
  void rotate_pool(Rng& rng);

  void run_cycle();
  /// Runs until the configured iteration count; `on_log` sees every record.
  void run(const std::function<void(const LogRecord&)>& on_log = {});

  /// Trimmed loss of a batch without any update (diagnostics and tests).
  float evaluate(const buf::Batch& batch, bool query_buffers);

  void save_state(const std::filesystem::path& dir) const;
  /// Restores a state written by save_state; config and dataset must match.
  void load_state(const std::filesystem::path& dir);

 private:
  ActiveScene fresh_slot(Rng& rng);
  buf::Batch draw_batch(const std::vector<int>& eligible, Rng& rng, std::string& note);
  std::vector<std::int64_t> buffer_sizes(bool query) const;
  void record_nonfinite(const buf::Batch& batch, const std::string& what);

  const PretrainDataset& data_;
  PretrainConfig cfg_;
  reg::Regressor<float> model_;
  ad::AdamW<float> net_opt_;
  std::vector<ActiveScene> pool_;
  std::vector<int> budgets_;
  ScheduleStats stats_;
  std::vector<LogRecord> log_;
  std::int64_t cycle_ = 0;
  int nonfinite_streak_ = 0;

  // accumulators for the current log window
  double win_map_sum_ = 0.0;
  std::int64_t win_map_n_ = 0;
  double win_query_sum_ = 0.0;
  std::int64_t win_query_n_ = 0;
  std::string win_notes_;
};

/// Reads the train tuples of a manifest into memory.
PretrainDataset load_dataset(const std::filesystem::path& manifest_path, const std::string& split = "train");

}  // namespace aceg::pre
