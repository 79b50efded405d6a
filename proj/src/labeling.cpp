#include "urlbench/labeling.hpp"

#include <algorithm>
#include <cmath>

#include "urlbench/csv.hpp"
#include "urlbench/errors.hpp"

namespace urlbench::labeling {

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::kClean: return "clean";
    case Verdict::kUnrated: return "unrated";
    case Verdict::kMalicious: return "malicious";
    case Verdict::kPhishing: return "phishing";
    case Verdict::kSuspicious: return "suspicious";
  }
  return "unrated";
}

std::optional<Verdict> parse_verdict(std::string_view name) {
  if (name == "clean") return Verdict::kClean;
  if (name == "unrated") return Verdict::kUnrated;
  if (name == "malicious") return Verdict::kMalicious;
  if (name == "phishing") return Verdict::kPhishing;
  if (name == "suspicious") return Verdict::kSuspicious;
  return std::nullopt;
}

std::vector<UrlVerdictSummary> aggregate_verdicts(const std::vector<VerdictRecord>& records) {
  std::vector<UrlVerdictSummary> out;
  std::unordered_map<std::string, size_t> index;
  index.reserve(records.size());
  for (const auto& rec : records) {
    auto [it, inserted] = index.try_emplace(rec.url, out.size());
    if (inserted) {
      UrlVerdictSummary s;
      s.url = rec.url;
      s.first_seen = rec.first_seen;
      out.push_back(std::move(s));
    }
    UrlVerdictSummary& s = out[it->second];
    s.verdicts[rec.vendor] = rec.verdict;
    s.first_seen = std::min(s.first_seen, rec.first_seen);
  }
  for (auto& s : out) {
    s.non_safe_count = 0;
    for (const auto& [vendor, verdict] : s.verdicts)
      if (is_non_safe(verdict)) ++s.non_safe_count;
  }
  return out;
}

std::vector<CalibrationItem> build_calibration_set(
    const std::vector<UrlVerdictSummary>& summaries, const LabelingConfig& cfg) {
  std::vector<CalibrationItem> out;
  for (size_t i = 0; i < summaries.size(); ++i) {
    int malicious = 0, phishing = 0;
    for (const auto& [vendor, verdict] : summaries[i].verdicts) {
      if (verdict == Verdict::kMalicious) ++malicious;
      if (verdict == Verdict::kPhishing) ++phishing;
    }
    int best = std::max(malicious, phishing);
    if (best >= cfg.calibration_min_detections) {
      // ties resolve to malicious
      Verdict tag = phishing > malicious ? Verdict::kPhishing : Verdict::kMalicious;
      out.push_back(CalibrationItem{i, tag});
    }
  }
  return out;
}

double power_mean(double a, double b, double p) {
  if (p == 0.0) return std::sqrt(a * b);
  if (p < 0.0 && (a == 0.0 || b == 0.0)) return 0.0;
  return std::pow((std::pow(a, p) + std::pow(b, p)) / 2.0, 1.0 / p);
}

std::vector<VendorMetrics> vendor_metrics(const std::vector<UrlVerdictSummary>& summaries,
                                          const std::vector<CalibrationItem>& calibration,
                                          const LabelingConfig& cfg) {
  if (calibration.empty())
    throw EmptyCalibrationError("calibration set is empty; cannot compute detection rates");

  std::set<std::string> vendors;
  for (const auto& s : summaries)
    for (const auto& [vendor, verdict] : s.verdicts) vendors.insert(vendor);

  std::vector<size_t> population;
  for (size_t i = 0; i < summaries.size(); ++i)
    if (summaries[i].non_safe_count > 0) population.push_back(i);

  std::vector<VendorMetrics> out;
  out.reserve(vendors.size());
  for (const auto& vendor : vendors) {
    VendorMetrics m;
    m.vendor = vendor;
    int correct = 0;
    for (const auto& item : calibration) {
      const auto& verdicts = summaries[item.summary_index].verdicts;
      auto it = verdicts.find(vendor);
      if (it != verdicts.end() && it->second == item.label) ++correct;
    }
    m.detection_rate = static_cast<double>(correct) / static_cast<double>(calibration.size());

    int flagged = 0;
    for (size_t idx : population) {
      const auto& verdicts = summaries[idx].verdicts;
      auto it = verdicts.find(vendor);
      if (it != verdicts.end() && is_non_safe(it->second)) ++flagged;
    }
    m.coverage = population.empty()
                     ? 0.0
                     : static_cast<double>(flagged) / static_cast<double>(population.size());
    m.quality = cfg.quality_scale *
                power_mean(m.detection_rate, m.coverage, cfg.power_mean_exponent);
    out.push_back(std::move(m));
  }
  return out;
}

std::set<std::string> select_high_quality(const std::vector<VendorMetrics>& metrics,
                                          const LabelingConfig& cfg) {
  std::set<std::string> out;
  for (const auto& m : metrics)
    if (m.detection_rate > cfg.hq_detection_rate_min && m.coverage > cfg.hq_coverage_min)
      out.insert(m.vendor);
  return out;
}

VendorMetricsMap make_metrics_map(const std::vector<VendorMetrics>& metrics) {
  VendorMetricsMap map;
  map.reserve(metrics.size());
  for (const auto& m : metrics) map[m.vendor] = m;
  return map;
}

std::optional<Label> assign_label(const UrlVerdictSummary& summary,
                                  const std::set<std::string>& high_quality,
                                  const VendorMetricsMap& metrics, const LabelingConfig& cfg) {
  int flags = 0;
  bool unanimous = true;
  Verdict tag = Verdict::kUnrated;
  double quality_sum = 0.0;
  for (const auto& [vendor, verdict] : summary.verdicts) {
    if (!is_non_safe(verdict) || !high_quality.count(vendor)) continue;
    if (flags == 0) {
      tag = verdict;
    } else if (verdict != tag) {
      unanimous = false;
    }
    ++flags;
    auto it = metrics.find(vendor);
    if (it != metrics.end()) quality_sum += it->second.quality;
  }
  if (flags == 0) return Label::kBenign;
  if (!unanimous || flags < 2 || quality_sum <= cfg.quality_threshold) return std::nullopt;
  return tag == Verdict::kPhishing ? Label::kPhishing : Label::kMalware;
}

std::vector<UrlRecord> filter_reputation_window(const std::vector<UrlRecord>& records,
                                                Timestamp collection_time, int window_months) {
  Timestamp boundary = subtract_months(collection_time, window_months);
  std::vector<UrlRecord> out;
  out.reserve(records.size());
  for (const auto& rec : records)
    if (rec.first_seen <= boundary) out.push_back(rec);
  return out;
}

std::pair<std::vector<UrlRecord>, std::vector<UrlRecord>> temporal_split(
    const std::vector<UrlRecord>& records, Timestamp cutoff) {
  std::pair<std::vector<UrlRecord>, std::vector<UrlRecord>> out;
  for (const auto& rec : records) {
    if (rec.first_seen < cutoff) out.first.push_back(rec);
    else out.second.push_back(rec);
  }
  return out;
}

Timestamp default_cutoff() { return *parse_iso8601("2022-09-01T00:00:00Z"); }

std::vector<VerdictRecord> load_verdicts(const std::string& path) {
  auto rows = csv::read_file(path);
  if (rows.empty()) throw IoError("empty verdicts file " + path);
  if (csv::join_row(rows[0].fields) != "url,vendor,verdict,first_seen")
    throw MalformedRowError(rows[0].line, "expected header 'url,vendor,verdict,first_seen'");
  std::vector<VerdictRecord> out;
  out.reserve(rows.size() - 1);
  for (size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != 4)
      throw MalformedRowError(row.line, "expected 4 columns");
    VerdictRecord rec;
    try {
      rec.url = normalize_url(row.fields[0]);
    } catch (const UrlError&) {
      rec.url = row.fields[0];  // curation removes these downstream
    }
    rec.vendor = row.fields[1];
    if (rec.vendor.empty()) throw MalformedRowError(row.line, "empty vendor");
    auto verdict = parse_verdict(row.fields[2]);
    if (!verdict) throw MalformedRowError(row.line, "unknown verdict '" + row.fields[2] + "'");
    rec.verdict = *verdict;
    auto ts = parse_iso8601(row.fields[3]);
    if (!ts) throw MalformedRowError(row.line, "bad first_seen '" + row.fields[3] + "'");
    rec.first_seen = *ts;
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace urlbench::labeling
