#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "urlbench/timeutil.hpp"

namespace urlbench::bench {

struct ScoredSample {
  double score = 0.0;  // p_malicious
  bool is_malicious = false;
  Timestamp first_seen = 0;
};

/// Mann-Whitney AUC with ties counted as 0.5. Throws DegenerateLabelsError
/// unless both classes are present.
double roc_auc(const std::vector<ScoredSample>& samples);

/// Conservative threshold: the highest cutoff admitting at most
/// floor(fpr * N) false positives; returns the fraction of positives at or
/// above it.
double recall_at_fpr(const std::vector<ScoredSample>& samples, double fpr);

struct MonthRow {
  int64_t month_idx = 0;
  std::string month;  // "YYYY-MM"
  size_t n = 0;
  std::optional<double> auc;             // absent when a class is missing
  std::optional<double> recall_at_1pct;  // likewise
};

/// Partitions by UTC calendar month of first_seen and evaluates each segment.
/// Rows cover the continuous month range, oldest first; empty or single-class
/// months carry null metrics.
std::vector<MonthRow> monthly_degradation(const std::vector<ScoredSample>& samples);

}  // namespace urlbench::bench
