#include "urlbench/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "urlbench/errors.hpp"

namespace urlbench::bench {

double roc_auc(const std::vector<ScoredSample>& samples) {
  size_t pos = 0, neg = 0;
  for (const auto& s : samples) (s.is_malicious ? pos : neg)++;
  if (pos == 0 || neg == 0)
    throw DegenerateLabelsError("roc_auc needs both classes");

  std::vector<size_t> order(samples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return samples[a].score < samples[b].score; });

  // Rank-sum with average ranks over tie groups.
  double pos_rank_sum = 0.0;
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i;
    while (j + 1 < order.size() && samples[order[j + 1]].score == samples[order[i]].score) ++j;
    double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (size_t k = i; k <= j; ++k)
      if (samples[order[k]].is_malicious) pos_rank_sum += avg_rank;
    i = j + 1;
  }
  double p = static_cast<double>(pos), n = static_cast<double>(neg);
  return (pos_rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

double recall_at_fpr(const std::vector<ScoredSample>& samples, double fpr) {
  if (!(fpr > 0.0 && fpr < 1.0)) throw ConfigError("fpr must be in (0,1)");
  std::vector<double> neg_scores;
  std::vector<double> pos_scores;
  for (const auto& s : samples) (s.is_malicious ? pos_scores : neg_scores).push_back(s.score);
  if (pos_scores.empty() || neg_scores.empty())
    throw DegenerateLabelsError("recall_at_fpr needs both classes");

  size_t allowed = static_cast<size_t>(std::floor(fpr * static_cast<double>(neg_scores.size())));
  if (allowed >= neg_scores.size()) return 1.0;

  std::sort(neg_scores.begin(), neg_scores.end(), std::greater<double>());
  // Any threshold must leave the (allowed+1)-th highest negative below it.
  double boundary = neg_scores[allowed];
  size_t hits = 0;
  for (double p : pos_scores)
    if (p > boundary) ++hits;
  return static_cast<double>(hits) / static_cast<double>(pos_scores.size());
}

std::vector<MonthRow> monthly_degradation(const std::vector<ScoredSample>& samples) {
  std::vector<MonthRow> rows;
  if (samples.empty()) return rows;

  int64_t lo = month_index(samples[0].first_seen), hi = lo;
  for (const auto& s : samples) {
    int64_t m = month_index(s.first_seen);
    lo = std::min(lo, m);
    hi = std::max(hi, m);
  }

  for (int64_t m = lo; m <= hi; ++m) {
    std::vector<ScoredSample> segment;
    for (const auto& s : samples)
      if (month_index(s.first_seen) == m) segment.push_back(s);
    MonthRow row;
    row.month_idx = m;
    row.month = format_month(m);
    row.n = segment.size();
    bool has_pos = false, has_neg = false;
    for (const auto& s : segment) (s.is_malicious ? has_pos : has_neg) = true;
    if (has_pos && has_neg) {
      row.auc = roc_auc(segment);
      row.recall_at_1pct = recall_at_fpr(segment, 0.01);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace urlbench::bench
