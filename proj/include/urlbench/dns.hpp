#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "urlbench/timeutil.hpp"
#include "urlbench/url.hpp"

namespace urlbench::dns {

struct DnsResponse {
  std::vector<uint32_t> ips;  // empty when the domain did not resolve
  uint32_t ttl = 0;           // minimum TTL across A answers; 0 when unresolved
  Timestamp resolved_at = 0;
};

struct IpMetadata {
  uint32_t asn = 0;
  std::string country;
  std::string isp;
};

/// Sorted, non-overlapping IPv4 ranges mapping to (ASN, country, ISP).
/// Loaded from the ip2asn v4 TSV dump:
///   range_start<TAB>range_end<TAB>AS_number<TAB>country_code<TAB>AS_description
/// with dotted-quad boundaries and inclusive ends. Rows with AS number 0 are
/// kept but report as unmapped.
class IpMetadataIndex {
 public:
  struct Row {
    uint32_t start;
    uint32_t end;
    uint32_t asn;
    std::string country;
    std::string isp;
  };

  static IpMetadataIndex load(const std::string& path);
  static IpMetadataIndex from_rows(std::vector<Row> rows);

  /// Binary search; nullopt when the IP falls outside every range or inside
  /// a not-routed (AS 0) range.
  std::optional<IpMetadata> lookup(uint32_t ip) const;

  size_t range_count() const { return ranges_.size(); }

 private:
  struct Range {
    uint32_t start;
    uint32_t end;
    int32_t meta;  // index into metas_, -1 for unmapped
  };
  std::vector<Range> ranges_;
  std::vector<IpMetadata> metas_;
};

/// Top-N ASNs, countries and ISPs of the training corpus, each block with an
/// implicit trailing "other" slot.
struct DnsVocab {
  std::vector<uint32_t> asns;
  std::vector<std::string> countries;
  std::vector<std::string> isps;

  int dim() const {
    return static_cast<int>(asns.size() + countries.size() + isps.size()) + 3 + 2;
  }
  int asn_block() const { return 0; }
  int country_block() const { return static_cast<int>(asns.size()) + 1; }
  int isp_block() const { return country_block() + static_cast<int>(countries.size()) + 1; }
  int ip_count_index() const { return isp_block() + static_cast<int>(isps.size()) + 1; }
  int ttl_index() const { return ip_count_index() + 1; }
};

/// Frequency over every resolved IP of every training record; ties broken
/// ascending (numeric for ASNs, lexicographic otherwise). Unmapped IPs do not
/// contribute.
DnsVocab build_dns_vocab(const std::vector<UrlRecord>& records, const IpMetadataIndex& index,
                         int top_k = 30);

/// Multi-hot ASN/country/ISP blocks followed by ip_count and raw TTL seconds.
/// Unresolved responses produce the all-zero vector. 95 dimensions with full
/// top-30 vocabs.
std::vector<float> extract_dns(const DnsResponse& resp, const IpMetadataIndex& index,
                               const DnsVocab& vocab);

}  // namespace urlbench::dns
