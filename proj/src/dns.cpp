#include "urlbench/dns.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "urlbench/errors.hpp"

namespace urlbench::dns {

IpMetadataIndex IpMetadataIndex::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open ip2asn file " + path);
  std::vector<Row> rows;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    // range_start \t range_end \t AS \t country \t description
    std::vector<std::string> parts;
    size_t start = 0;
    for (int i = 0; i < 4; ++i) {
      size_t tab = line.find('\t', start);
      if (tab == std::string::npos)
        throw MalformedRowError(lineno, "expected 5 tab-separated fields");
      parts.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    parts.push_back(line.substr(start));

    Row row;
    auto a = parse_ipv4(parts[0]);
    auto b = parse_ipv4(parts[1]);
    if (!a || !b) throw MalformedRowError(lineno, "bad IPv4 boundary");
    row.start = *a;
    row.end = *b;
    if (row.start > row.end) throw MalformedRowError(lineno, "range start exceeds end");
    uint64_t asn = 0;
    if (parts[2].empty()) throw MalformedRowError(lineno, "empty AS number");
    for (char c : parts[2]) {
      if (c < '0' || c > '9') throw MalformedRowError(lineno, "bad AS number '" + parts[2] + "'");
      asn = asn * 10 + static_cast<uint64_t>(c - '0');
      if (asn > 0xffffffffull) throw MalformedRowError(lineno, "AS number out of range");
    }
    row.asn = static_cast<uint32_t>(asn);
    row.country = parts[3];
    row.isp = parts[4];
    rows.push_back(std::move(row));
  }
  return from_rows(std::move(rows));
}

IpMetadataIndex IpMetadataIndex::from_rows(std::vector<Row> rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.start != b.start) return a.start < b.start;
    return a.end < b.end;
  });

  IpMetadataIndex index;
  index.ranges_.reserve(rows.size());
  for (auto& row : rows) {
    uint32_t start = row.start;
    // Overlaps are clipped against the previous range; fully shadowed rows
    // are dropped.
    if (!index.ranges_.empty()) {
      const Range& prev = index.ranges_.back();
      if (start <= prev.end) {
        if (prev.end == 0xffffffffu || prev.end + 1 > row.end) continue;
        start = prev.end + 1;
      }
    }
    int32_t meta = -1;
    if (row.asn != 0) {
      meta = static_cast<int32_t>(index.metas_.size());
      index.metas_.push_back(IpMetadata{row.asn, std::move(row.country), std::move(row.isp)});
    }
    index.ranges_.push_back(Range{start, row.end, meta});
  }
  return index;
}

std::optional<IpMetadata> IpMetadataIndex::lookup(uint32_t ip) const {
  auto it = std::upper_bound(ranges_.begin(), ranges_.end(), ip,
                             [](uint32_t v, const Range& r) { return v < r.start; });
  if (it == ranges_.begin()) return std::nullopt;
  --it;
  if (ip > it->end || it->meta < 0) return std::nullopt;
  return metas_[static_cast<size_t>(it->meta)];
}

DnsVocab build_dns_vocab(const std::vector<UrlRecord>& records, const IpMetadataIndex& index,
                         int top_k) {
  if (records.empty()) throw EmptyCorpusError("cannot build DNS vocab from an empty corpus");
  if (top_k < 1) throw ConfigError("dns vocab size must be >= 1");

  std::map<uint32_t, int64_t> asn_counts;
  std::map<std::string, int64_t> country_counts;
  std::map<std::string, int64_t> isp_counts;
  for (const auto& rec : records) {
    for (uint32_t ip : rec.ips) {
      auto meta = index.lookup(ip);
      if (!meta) continue;
      ++asn_counts[meta->asn];
      ++country_counts[meta->country];
      ++isp_counts[meta->isp];
    }
  }

  auto top = [top_k](auto& counts, auto& out) {
    using Item = std::pair<typename std::decay_t<decltype(counts)>::key_type, int64_t>;
    std::vector<Item> items(counts.begin(), counts.end());
    std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    for (const auto& [key, n] : items) {
      if (static_cast<int>(out.size()) >= top_k) break;
      out.push_back(key);
    }
  };

  DnsVocab vocab;
  top(asn_counts, vocab.asns);
  top(country_counts, vocab.countries);
  top(isp_counts, vocab.isps);
  return vocab;
}

namespace {

template <typename T>
int slot_of(const std::vector<T>& entries, const T& value) {
  auto it = std::find(entries.begin(), entries.end(), value);
  return it == entries.end() ? static_cast<int>(entries.size())
                             : static_cast<int>(it - entries.begin());
}

}  // namespace

std::vector<float> extract_dns(const DnsResponse& resp, const IpMetadataIndex& index,
                               const DnsVocab& vocab) {
  std::vector<float> v(vocab.dim(), 0.0f);
  for (uint32_t ip : resp.ips) {
    auto meta = index.lookup(ip);
    int asn_slot = meta ? slot_of(vocab.asns, meta->asn) : static_cast<int>(vocab.asns.size());
    int country_slot =
        meta ? slot_of(vocab.countries, meta->country) : static_cast<int>(vocab.countries.size());
    int isp_slot = meta ? slot_of(vocab.isps, meta->isp) : static_cast<int>(vocab.isps.size());
    v[vocab.asn_block() + asn_slot] = 1.0f;
    v[vocab.country_block() + country_slot] = 1.0f;
    v[vocab.isp_block() + isp_slot] = 1.0f;
  }
  v[vocab.ip_count_index()] = static_cast<float>(resp.ips.size());
  v[vocab.ttl_index()] = static_cast<float>(resp.ttl);
  return v;
}

}  // namespace urlbench::dns
