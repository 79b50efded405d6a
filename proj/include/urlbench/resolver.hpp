#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "urlbench/dns.hpp"

namespace urlbench::dns {

enum class TtlMode : uint8_t { kMin, kMax, kFirst };

struct ResolverConfig {
  std::string server = "1.1.1.1";
  uint16_t port = 53;
  int timeout_ms = 2000;
  int retries = 1;        // attempts after the first
  int max_inflight = 64;  // concurrent queries during batch enrichment
  TtlMode ttl_mode = TtlMode::kMin;
};

/// Single A-record query over UDP with TCP fallback on truncation.
/// NXDOMAIN, SERVFAIL and timeouts all yield the empty response (ips=[],
/// ttl=0); IoError is reserved for local socket failures.
DnsResponse resolve(const std::string& domain, const ResolverConfig& config);

/// Resolves a batch with at most config.max_inflight queries in flight.
/// results[i] always corresponds to domains[i].
std::vector<DnsResponse> resolve_many(const std::vector<std::string>& domains,
                                      const ResolverConfig& config);

/// Offline domain -> DnsResponse store, CSV `domain,ips,ttl,resolved_at`.
/// Concurrent reads are safe; writes need external exclusivity.
class DnsCache {
 public:
  DnsCache() = default;

  static DnsCache load(const std::string& path);
  void save(const std::string& path) const;

  std::optional<DnsResponse> lookup(const std::string& domain) const;
  void insert(const std::string& domain, DnsResponse resp);
  size_t size() const { return map_.size(); }

 private:
  std::unordered_map<std::string, DnsResponse> map_;
};

// Wire helpers, exposed for tests.
std::vector<uint8_t> encode_query(uint16_t id, const std::string& domain);

struct WireAnswer {
  bool truncated = false;
  int rcode = 0;
  std::vector<std::pair<uint32_t, uint32_t>> a_records;  // (ip, ttl)
};
std::optional<WireAnswer> decode_response(const uint8_t* data, size_t len, uint16_t expect_id);

}  // namespace urlbench::dns
