#include "aceg/maploc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "aceg/common/error.hpp"

namespace aceg::maploc {

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<Threshold> default_thresholds() { return {{1.0, 0.02}, {5.0, 0.1}, {10.0, 0.25}}; }

double MetricsReport::accuracy_at(double deg, double dist) const {
  for (const auto& a : accuracy) {
    if (a.threshold.deg == deg && a.threshold.dist == dist) return a.accuracy;
  }
  throw PreconditionError("no accuracy recorded at the requested threshold");
}

MetricsReport evaluate(std::vector<LocalizeResult> results, const std::vector<Threshold>& thresholds) {
  MetricsReport r;
  r.frames = static_cast<int>(results.size());
  std::vector<double> t, rot;
  for (const auto& res : results) {
    if (!res.success) continue;
    if (!res.has_gt) throw PreconditionError("evaluate: successful result without ground-truth errors");
    ++r.successes;
    t.push_back(res.error.translation);
    rot.push_back(res.error.rotation_deg);
  }
  r.median_translation = median(t);
  r.median_rotation_deg = median(rot);
  r.failure_rate = r.frames > 0 ? static_cast<double>(r.frames - r.successes) / r.frames : 0.0;
  for (const auto& th : thresholds) {
    int ok = 0;
    for (const auto& res : results) {
      if (res.success && res.error.rotation_deg <= th.deg && res.error.translation <= th.dist) ++ok;
    }
    r.accuracy.push_back({th, r.frames > 0 ? static_cast<double>(ok) / r.frames : 0.0});
  }
  r.records = std::move(results);
  return r;
}

MetricsReport evaluate(std::vector<LocalizeResult> results, const std::vector<geo::PoseSE3>& gt,
                       const std::vector<Threshold>& thresholds) {
  if (results.size() != gt.size()) throw ShapeError("evaluate: results and ground truth differ in length");
  for (std::size_t i = 0; i < results.size(); ++i) {
    results[i].has_gt = true;
    results[i].error = results[i].success ? geo::pose_error(results[i].pose, gt[i]) : geo::PoseError{};
  }
  return evaluate(std::move(results), thresholds);
}

std::string MetricsReport::to_table() const {
  std::string s;
  char buf[160];
  auto line = [&](const char* key, const char* fmt, auto v) {
    std::snprintf(buf, sizeof buf, fmt, v);
    s += key;
    s.append(std::max<std::size_t>(1, 24 - std::min<std::size_t>(24, std::char_traits<char>::length(key))), ' ');
    s += buf;
    s += '\n';
  };
  line("frames", "%d", frames);
  line("successes", "%d", successes);
  line("failure_rate", "%.6f", failure_rate);
  line("median_t", "%.6g", median_translation);
  line("median_r_deg", "%.6g", median_rotation_deg);
  for (const auto& a : accuracy) {
    char key[64];
    std::snprintf(key, sizeof key, "acc@%gdeg,%g", a.threshold.deg, a.threshold.dist);
    line(key, "%.6f", a.accuracy);
  }
  return s;
}

std::string MetricsReport::records_text() const {
  std::string s = "# frame status t_err r_err_deg inliers n_corr n_filtered\n";
  char buf[200];
  for (const auto& r : records) {
    if (r.success && r.has_gt) {
      std::snprintf(buf, sizeof buf, "%d ok %.9g %.9g %d %d %d\n", r.frame, r.error.translation, r.error.rotation_deg,
                    r.inliers, r.correspondences, r.filtered);
    } else {
      std::snprintf(buf, sizeof buf, "%d %s nan nan %d %d %d\n", r.frame, r.success ? "ok" : "fail", r.inliers,
                    r.correspondences, r.filtered);
    }
    s += buf;
  }
  return s;
}

void write_report(const MetricsReport& r, const std::filesystem::path& table, const std::filesystem::path& records) {
  auto put = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw FormatError("cannot write " + p.string());
    f << text;
  };
  put(table, r.to_table());
  put(records, r.records_text());
}

}  // namespace aceg::maploc
