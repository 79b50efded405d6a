#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "urlbench/timeutil.hpp"
#include "urlbench/url.hpp"

namespace urlbench::labeling {

enum class Verdict : uint8_t { kClean, kUnrated, kMalicious, kPhishing, kSuspicious };

const char* verdict_name(Verdict v);
std::optional<Verdict> parse_verdict(std::string_view name);

/// 'suspicious' is recorded but never counts as non-safe.
inline bool is_non_safe(Verdict v) {
  return v == Verdict::kMalicious || v == Verdict::kPhishing;
}

struct VerdictRecord {
  std::string url;
  std::string vendor;
  Verdict verdict = Verdict::kUnrated;
  Timestamp first_seen = 0;
};

struct UrlVerdictSummary {
  std::string url;
  std::map<std::string, Verdict> verdicts;  // per vendor; deterministic order
  int non_safe_count = 0;
  Timestamp first_seen = 0;  // earliest across the URL's rows
};

struct VendorMetrics {
  std::string vendor;
  double detection_rate = 0.0;
  double coverage = 0.0;
  double quality = 0.0;
};

struct LabelingConfig {
  int calibration_min_detections = 9;
  double hq_detection_rate_min = 0.90;
  double hq_coverage_min = 0.10;
  double quality_threshold = 2.5;
  double power_mean_exponent = 1.0;  // 0 selects the geometric mean
  double quality_scale = 1.0;
};

/// One summary per URL, in order of first appearance. Later rows for the same
/// (url, vendor) overwrite earlier ones.
std::vector<UrlVerdictSummary> aggregate_verdicts(const std::vector<VerdictRecord>& records);

struct CalibrationItem {
  size_t summary_index;  // into the summaries vector
  Verdict label;         // the majority non-safe tag
};

/// High-confidence subset: URLs where at least calibration_min_detections
/// vendors agree on the same non-safe tag.
std::vector<CalibrationItem> build_calibration_set(
    const std::vector<UrlVerdictSummary>& summaries, const LabelingConfig& cfg);

/// ((a^p + b^p)/2)^(1/p); geometric mean at p == 0.
double power_mean(double a, double b, double p);

/// Detection rate over the calibration set, coverage over the potential
/// non-safe population (summaries with at least one non-safe verdict), and
/// quality = quality_scale * power_mean(dr, cov, p). Output sorted by vendor
/// name. Throws EmptyCalibrationError when calibration is empty.
std::vector<VendorMetrics> vendor_metrics(const std::vector<UrlVerdictSummary>& summaries,
                                          const std::vector<CalibrationItem>& calibration,
                                          const LabelingConfig& cfg);

std::set<std::string> select_high_quality(const std::vector<VendorMetrics>& metrics,
                                          const LabelingConfig& cfg);

using VendorMetricsMap = std::unordered_map<std::string, VendorMetrics>;
VendorMetricsMap make_metrics_map(const std::vector<VendorMetrics>& metrics);

/// malware/phishing when >= 2 high-quality vendors agree on the identical
/// non-safe tag, no high-quality vendor disagrees with another non-safe tag,
/// and their summed quality exceeds the threshold; benign when no
/// high-quality vendor flagged the URL; nullopt (dropped) otherwise.
std::optional<Label> assign_label(const UrlVerdictSummary& summary,
                                  const std::set<std::string>& high_quality,
                                  const VendorMetricsMap& metrics, const LabelingConfig& cfg);

/// Keeps records with first_seen <= collection_time minus the window.
std::vector<UrlRecord> filter_reputation_window(const std::vector<UrlRecord>& records,
                                                Timestamp collection_time,
                                                int window_months = 2);

/// train: first_seen < cutoff; test: first_seen >= cutoff.
std::pair<std::vector<UrlRecord>, std::vector<UrlRecord>> temporal_split(
    const std::vector<UrlRecord>& records, Timestamp cutoff);

/// Default split boundary, 2022-09-01T00:00:00Z.
Timestamp default_cutoff();

/// Verdicts CSV `url,vendor,verdict,first_seen`; malformed rows throw.
/// URLs are canonicalized when they parse; unparsable ones are kept verbatim
/// (they fall out later during curation).
std::vector<VerdictRecord> load_verdicts(const std::string& path);

}  // namespace urlbench::labeling
