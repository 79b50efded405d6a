#pragma once

#include <optional>
#include <string>
#include <vector>

#include "urlbench/labeling.hpp"
#include "urlbench/latency.hpp"
#include "urlbench/metrics.hpp"
#include "urlbench/nn/featurized.hpp"
#include "urlbench/nn/model_io.hpp"
#include "urlbench/nn/train.hpp"
#include "urlbench/resolver.hpp"

namespace urlbench::pipeline {

// ---------- curate ----------

struct CurateOptions {
  std::optional<Timestamp> collection_time;  // window filter skipped when absent
  int window_months = 2;
  dns::DnsCache* cache = nullptr;  // fills missing ips; updated by live lookups
  bool live_dns = false;
  dns::ResolverConfig resolver;
};

struct CurateReport {
  size_t input_rows = 0;
  size_t malformed_rows = 0;
  size_t bad_scheme = 0;
  size_t ip_literal = 0;
  size_t malformed_host = 0;
  size_t unknown_tld = 0;
  size_t dns_padded = 0;  // kept, but with the unresolved default
  size_t duplicates_removed = 0;
  size_t window_filtered = 0;
  size_t output_rows = 0;

  size_t total_dropped() const {
    return malformed_rows + bad_scheme + ip_literal + malformed_host + unknown_tld +
           duplicates_removed + window_filtered;
  }
};

CurateReport curate(const std::string& in_csv, const std::string& out_csv,
                    const TldRegistry& registry, const CurateOptions& options);

// ---------- label ----------

struct LabelReport {
  size_t verdict_rows = 0;
  size_t urls = 0;
  size_t calibration_size = 0;
  size_t vendors = 0;
  size_t high_quality_vendors = 0;
  size_t benign = 0;
  size_t malware = 0;
  size_t phishing = 0;
  size_t dropped = 0;
};

LabelReport label(const std::string& verdicts_csv, const std::string& out_dataset_csv,
                  const std::string& out_metrics_csv, const labeling::LabelingConfig& cfg);

// ---------- featurize ----------

/// Builds every vocabulary on the records before the cutoff, then featurizes
/// all records. DNS vectors come from each record's own ips/ttl columns.
nn::FeaturizedFile featurize(const std::vector<UrlRecord>& records,
                             const TldRegistry& registry, const dns::IpMetadataIndex& index,
                             const nn::ModelConfig& cfg, Timestamp cutoff);

// ---------- train ----------

struct TrainOutput {
  nn::Model<float> model;
  std::vector<nn::EpochStats> epochs;
};

/// Tokenizer-facing fields of cfg (sequence lengths, vocab sizes, entropy
/// mode) are taken from the featurized file; the rest of cfg applies as
/// given. Trains on records before the file's cutoff.
TrainOutput train_model(const nn::FeaturizedFile& file, nn::ModelConfig cfg,
                        const nn::TrainConfig& tcfg);

// ---------- eval ----------

enum class Split : uint8_t { kTrain, kTest, kAll };

std::vector<bench::ScoredSample> score_records(const nn::Model<float>& model,
                                               const nn::FeaturizedFile& file, Split split);

struct EvalReport {
  size_t n = 0;
  double auc = 0.0;
  double recall_at_1pct = 0.0;
  double recall_at_01pct = 0.0;
};

EvalReport evaluate(const nn::Model<float>& model, const nn::FeaturizedFile& file, Split split);

// ---------- predict ----------

struct PredictOptions {
  const dns::DnsCache* cache = nullptr;
  bool live_dns = false;
  dns::ResolverConfig resolver;
};

nn::Prediction predict_url(const nn::Model<float>& model, const std::string& url,
                           const TldRegistry& registry, const dns::IpMetadataIndex& index,
                           const PredictOptions& options);

// ---------- report writers ----------

void write_eval_csv(const std::string& path, const EvalReport& report);
void write_degradation_csv(const std::string& path, const std::vector<bench::MonthRow>& rows);
void write_vendor_metrics_csv(const std::string& path,
                              const std::vector<labeling::VendorMetrics>& metrics);
void write_latency_csv(const std::string& path, const bench::LatencyReport& report);

}  // namespace urlbench::pipeline
