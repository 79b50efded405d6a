#pragma once

#include <string>
#include <vector>

#include "urlbench/metrics.hpp"
#include "urlbench/nn/model.hpp"
#include "urlbench/resolver.hpp"

namespace urlbench::bench {

struct LatencyReport {
  std::vector<double> per_url_ms;
  double median_ms = 0.0;
  double mean_ms = 0.0;
  double p99_ms = 0.0;
  double sequential_50_total_ms = 0.0;  // sum of the first 50 measured URLs
  bool realtime = false;                // sequential_50_total_ms < 500
};

/// Times parse + tokenize + lexical extraction + DNS vector construction +
/// forward pass per URL, sequentially on one thread, with DNS answers served
/// from the offline cache (a miss counts as unresolved). Needs >= 50 URLs;
/// warm-up passes are not measured.
LatencyReport latency_bench(const nn::Model<float>& model, const std::vector<std::string>& urls,
                            const TldRegistry& registry, const dns::IpMetadataIndex& index,
                            const dns::DnsCache& cache, int warmup_urls = 10);

}  // namespace urlbench::bench
