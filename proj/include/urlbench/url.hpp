#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "urlbench/timeutil.hpp"

namespace urlbench {

enum class Label : uint8_t { kBenign = 0, kMalware = 1, kPhishing = 2 };

const char* label_name(Label label);
std::optional<Label> parse_label(std::string_view name);

enum class Scheme : uint8_t { kHttp, kHttps };

enum class UrlErrorKind : uint8_t {
  kNoScheme,       // not http:// or https://
  kIpLiteralHost,  // host is a dotted-quad IPv4 literal
  kUnknownTld,     // no registry suffix matches the host
  kMalformedHost,  // empty labels, illegal characters, userinfo, odd ports
};

class UrlError : public std::runtime_error {
 public:
  UrlError(UrlErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  UrlErrorKind kind() const { return kind_; }

 private:
  UrlErrorKind kind_;
};

/// Recognized TLD suffixes from a newline-delimited file ('#' comments
/// allowed). Entries are stored lowercase without a leading dot; multi-label
/// suffixes such as co.uk are honored by longest-suffix matching.
class TldRegistry {
 public:
  static TldRegistry load(const std::string& path);
  static TldRegistry from_list(const std::vector<std::string>& suffixes);

  bool contains(const std::string& suffix) const { return suffixes_.count(suffix) > 0; }
  size_t size() const { return suffixes_.size(); }
  int max_labels() const { return max_labels_; }

 private:
  std::unordered_set<std::string> suffixes_;
  int max_labels_ = 0;
};

/// Structural decomposition of a canonical URL.
struct ParsedUrl {
  Scheme scheme = Scheme::kHttp;
  std::vector<std::string> subdomains;  // outermost first
  std::string domain;                   // registrable label, never an IP
  std::string tld;                      // registry suffix, possibly multi-label
  std::string path;                     // may be empty; case preserved
  std::string raw;                      // input string as given

  std::string host() const;
  std::string canonical() const;
};

struct UrlRecord {
  std::string url;  // canonical
  Label label = Label::kBenign;
  Timestamp first_seen = 0;
  std::vector<uint32_t> ips;  // IPv4, host byte order; empty when unresolved
  uint32_t ttl = 0;           // seconds; 0 when unresolved
};

std::optional<uint32_t> parse_ipv4(std::string_view s);
std::string format_ipv4(uint32_t ip);

/// Scheme/host/path split with all syntactic validation except the TLD
/// lookup. Query string, fragment and default ports are dropped here, so the
/// reassembled form is already canonical.
struct UrlComponents {
  Scheme scheme;
  std::vector<std::string> host_labels;  // lowercased
  std::string path;
};
UrlComponents parse_components(std::string_view raw);

ParsedUrl parse_url(const std::string& raw, const TldRegistry& registry);

/// Canonical form: lowercased scheme and host, default port elided, query and
/// fragment removed, path untouched. Idempotent. Does not need a registry.
std::string normalize_url(const std::string& raw);

/// One record per distinct URL; the survivor carries the minimum first_seen.
/// Survivor order is the input order of first occurrence.
std::vector<UrlRecord> dedup_records(const std::vector<UrlRecord>& records);

struct SkippedRow {
  size_t line;
  std::string reason;
};

struct DatasetLoadResult {
  std::vector<UrlRecord> records;
  std::vector<SkippedRow> skipped;
};

/// Reads the dataset CSV (columns url,label,first_seen,ips,ttl). Rows that
/// fail validation are skipped and reported; in strict mode the first bad row
/// throws MalformedRowError instead. URLs must already be canonical.
DatasetLoadResult load_dataset(const std::string& path, const TldRegistry& registry,
                               bool strict = false);

void save_dataset(const std::string& path, const std::vector<UrlRecord>& records);

}  // namespace urlbench
