#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "aceg/maploc/localize.hpp"

namespace aceg::maploc {

struct Threshold {
  double deg = 5.0;
  double dist = 0.1;
};

struct ThresholdAccuracy {
  Threshold threshold;
  double accuracy = 0.0;
};

struct MetricsReport {
  int frames = 0;
  int successes = 0;
  double median_translation = 0.0;  // over successes; NaN if none
  double median_rotation_deg = 0.0;
  double failure_rate = 0.0;
  std::vector<ThresholdAccuracy> accuracy;
  std::vector<LocalizeResult> records;

  /// Accuracy at a threshold present in `accuracy`; throws otherwise.
  double accuracy_at(double deg, double dist) const;
  std::string to_table() const;
  std::string records_text() const;
};

std::vector<Threshold> default_thresholds();

/// Fills pose errors from `gt` (aligned with `results`) and aggregates.
MetricsReport evaluate(std::vector<LocalizeResult> results, const std::vector<geo::PoseSE3>& gt,
                       const std::vector<Threshold>& thresholds = default_thresholds());

/// Aggregates results whose errors are already filled in.
MetricsReport evaluate(std::vector<LocalizeResult> results,
                       const std::vector<Threshold>& thresholds = default_thresholds());

/// Median with the two-middle average for even counts. NaN when empty.
double median(std::vector<double> v);

void write_report(const MetricsReport& r, const std::filesystem::path& table, const std::filesystem::path& records);

}  // namespace aceg::maploc
