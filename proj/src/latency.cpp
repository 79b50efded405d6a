#include "urlbench/latency.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "urlbench/errors.hpp"
#include "urlbench/lexical.hpp"

namespace urlbench::bench {

namespace {

nn::Prediction classify_once(const nn::Model<float>& model, const std::string& url,
                             const TldRegistry& registry, const dns::IpMetadataIndex& index,
                             const dns::DnsCache& cache) {
  ParsedUrl parsed = parse_url(url, registry);
  std::string canon = parsed.canonical();
  nn::TokenizedUrl tok =
      nn::tokenize(canon, model.word_vocab, model.cfg.char_seq_len, model.cfg.word_seq_len);
  std::vector<float> lex = lexical::extract_lexical(parsed, model.tld_vocab,
                                                    model.cfg.entropy_mode);
  dns::DnsResponse resp;
  if (auto hit = cache.lookup(parsed.host())) resp = *hit;
  std::vector<float> dnsv = dns::extract_dns(resp, index, model.dns_vocab);
  return nn::predict(model, tok, lex, dnsv);
}

}  // namespace

LatencyReport latency_bench(const nn::Model<float>& model, const std::vector<std::string>& urls,
                            const TldRegistry& registry, const dns::IpMetadataIndex& index,
                            const dns::DnsCache& cache, int warmup_urls) {
  if (urls.size() < 50)
    throw InsufficientUrlsError("latency bench needs at least 50 URLs, got " +
                                std::to_string(urls.size()));

  size_t warm = std::min<size_t>(std::max(0, warmup_urls), urls.size());
  for (size_t i = 0; i < warm; ++i)
    (void)classify_once(model, urls[i], registry, index, cache);

  LatencyReport report;
  report.per_url_ms.reserve(urls.size());
  using Clock = std::chrono::steady_clock;
  for (const auto& url : urls) {
    auto t0 = Clock::now();
    (void)classify_once(model, url, registry, index, cache);
    auto t1 = Clock::now();
    report.per_url_ms.push_back(
        std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(t1 - t0).count());
  }

  for (size_t i = 0; i < 50; ++i) report.sequential_50_total_ms += report.per_url_ms[i];
  report.realtime = report.sequential_50_total_ms < 500.0;

  std::vector<double> sorted = report.per_url_ms;
  std::sort(sorted.begin(), sorted.end());
  size_t n = sorted.size();
  report.median_ms = n % 2 ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
  double sum = 0.0;
  for (double v : sorted) sum += v;
  report.mean_ms = sum / static_cast<double>(n);
  size_t rank = static_cast<size_t>(std::ceil(0.99 * static_cast<double>(n)));
  report.p99_ms = sorted[std::min(n - 1, rank == 0 ? 0 : rank - 1)];
  return report;
}

}  // namespace urlbench::bench
