#include "urlbench/url.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <unordered_map>

#include "urlbench/csv.hpp"
#include "urlbench/errors.hpp"

namespace urlbench {

const char* label_name(Label label) {
  switch (label) {
    case Label::kBenign: return "benign";
    case Label::kMalware: return "malware";
    case Label::kPhishing: return "phishing";
  }
  return "benign";
}

std::optional<Label> parse_label(std::string_view name) {
  if (name == "benign") return Label::kBenign;
  if (name == "malware") return Label::kMalware;
  if (name == "phishing") return Label::kPhishing;
  return std::nullopt;
}

TldRegistry TldRegistry::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open TLD registry " + path);
  std::vector<std::string> suffixes;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
      line.pop_back();
    size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    line = line.substr(start);
    if (line.empty() || line[0] == '#') continue;
    suffixes.push_back(line);
  }
  return from_list(suffixes);
}

TldRegistry TldRegistry::from_list(const std::vector<std::string>& suffixes) {
  TldRegistry reg;
  for (std::string s : suffixes) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (!s.empty() && s.front() == '.') s.erase(s.begin());
    if (s.empty()) continue;
    int labels = 1 + static_cast<int>(std::count(s.begin(), s.end(), '.'));
    reg.max_labels_ = std::max(reg.max_labels_, labels);
    reg.suffixes_.insert(std::move(s));
  }
  if (reg.suffixes_.empty()) throw IoError("TLD registry is empty");
  return reg;
}

std::string ParsedUrl::host() const {
  std::string out;
  for (const auto& s : subdomains) {
    out += s;
    out.push_back('.');
  }
  out += domain;
  out.push_back('.');
  out += tld;
  return out;
}

std::string ParsedUrl::canonical() const {
  std::string out = scheme == Scheme::kHttps ? "https://" : "http://";
  out += host();
  out += path;
  return out;
}

std::optional<uint32_t> parse_ipv4(std::string_view s) {
  uint32_t ip = 0;
  int octets = 0;
  size_t i = 0;
  while (i <= s.size()) {
    size_t dot = s.find('.', i);
    std::string_view part = s.substr(i, (dot == std::string_view::npos ? s.size() : dot) - i);
    if (part.empty() || part.size() > 3) return std::nullopt;
    uint32_t v = 0;
    for (char c : part) {
      if (c < '0' || c > '9') return std::nullopt;
      v = v * 10 + static_cast<uint32_t>(c - '0');
    }
    if (v > 255) return std::nullopt;
    ip = (ip << 8) | v;
    ++octets;
    if (dot == std::string_view::npos) break;
    i = dot + 1;
    if (i > s.size()) return std::nullopt;
  }
  if (octets != 4) return std::nullopt;
  return ip;
}

std::string format_ipv4(uint32_t ip) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%u.%u.%u.%u", (ip >> 24) & 0xff, (ip >> 16) & 0xff,
                (ip >> 8) & 0xff, ip & 0xff);
  return buf;
}

namespace {

bool iequals_prefix(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) != prefix[i]) return false;
  }
  return true;
}

bool is_ipv4_labels(const std::vector<std::string>& labels) {
  if (labels.size() != 4) return false;
  for (const auto& l : labels) {
    if (l.empty() || l.size() > 3) return false;
    uint32_t v = 0;
    for (char c : l) {
      if (c < '0' || c > '9') return false;
      v = v * 10 + static_cast<uint32_t>(c - '0');
    }
    if (v > 255) return false;
  }
  return true;
}

}  // namespace

UrlComponents parse_components(std::string_view raw) {
  UrlComponents out;
  std::string_view rest;
  if (iequals_prefix(raw, "https://")) {
    out.scheme = Scheme::kHttps;
    rest = raw.substr(8);
  } else if (iequals_prefix(raw, "http://")) {
    out.scheme = Scheme::kHttp;
    rest = raw.substr(7);
  } else {
    throw UrlError(UrlErrorKind::kNoScheme, "URL must start with http:// or https://");
  }

  size_t auth_end = rest.find_first_of("/?#");
  std::string_view authority = rest.substr(0, auth_end);
  std::string_view path_part =
      auth_end == std::string_view::npos ? std::string_view{} : rest.substr(auth_end);

  if (authority.empty())
    throw UrlError(UrlErrorKind::kMalformedHost, "empty host");
  if (authority.find('@') != std::string_view::npos)
    throw UrlError(UrlErrorKind::kMalformedHost, "userinfo in authority is not accepted");

  std::string_view host = authority;
  size_t colon = authority.find(':');
  if (colon != std::string_view::npos) {
    std::string_view port = authority.substr(colon + 1);
    host = authority.substr(0, colon);
    const char* def = out.scheme == Scheme::kHttps ? "443" : "80";
    if (port != def)
      throw UrlError(UrlErrorKind::kMalformedHost,
                     "non-default port :" + std::string(port));
  }
  if (host.empty()) throw UrlError(UrlErrorKind::kMalformedHost, "empty host");

  // Split into labels, lowercasing as we go.
  std::vector<std::string> labels;
  std::string label;
  for (char raw_ch : host) {
    unsigned char ch = static_cast<unsigned char>(raw_ch);
    if (ch == '.') {
      if (label.empty())
        throw UrlError(UrlErrorKind::kMalformedHost, "empty host label");
      labels.push_back(std::move(label));
      label.clear();
      continue;
    }
    if (ch >= 0x80)
      throw UrlError(UrlErrorKind::kMalformedHost,
                     "non-ASCII host (punycode required)");
    char lower = static_cast<char>(std::tolower(ch));
    bool ok = (lower >= 'a' && lower <= 'z') || (lower >= '0' && lower <= '9') || lower == '-';
    if (!ok)
      throw UrlError(UrlErrorKind::kMalformedHost,
                     std::string("illegal host character '") + raw_ch + "'");
    label.push_back(lower);
  }
  if (label.empty()) throw UrlError(UrlErrorKind::kMalformedHost, "empty host label");
  labels.push_back(std::move(label));
  for (const auto& l : labels) {
    if (l.size() > 63 || l.front() == '-' || l.back() == '-')
      throw UrlError(UrlErrorKind::kMalformedHost, "invalid host label '" + l + "'");
  }

  if (is_ipv4_labels(labels))
    throw UrlError(UrlErrorKind::kIpLiteralHost, "IP-literal host");

  // Path: keep case, drop query and fragment.
  std::string path;
  for (char c : path_part) {
    if (c == '?' || c == '#') break;
    unsigned char uc = static_cast<unsigned char>(c);
    if (uc < 0x20 || uc > 0x7e)
      throw UrlError(UrlErrorKind::kMalformedHost, "non-printable character in path");
    path.push_back(c);
  }

  out.host_labels = std::move(labels);
  out.path = std::move(path);
  return out;
}

ParsedUrl parse_url(const std::string& raw, const TldRegistry& registry) {
  if (raw.empty()) throw UrlError(UrlErrorKind::kNoScheme, "empty URL");
  UrlComponents comps = parse_components(raw);
  const auto& labels = comps.host_labels;
  int n = static_cast<int>(labels.size());
  int max_suffix = std::min(n - 1, registry.max_labels());
  for (int s = max_suffix; s >= 1; --s) {
    std::string suffix;
    for (int i = n - s; i < n; ++i) {
      if (!suffix.empty()) suffix.push_back('.');
      suffix += labels[i];
    }
    if (registry.contains(suffix)) {
      ParsedUrl out;
      out.scheme = comps.scheme;
      out.tld = std::move(suffix);
      out.domain = labels[n - s - 1];
      out.subdomains.assign(labels.begin(), labels.begin() + (n - s - 1));
      out.path = std::move(comps.path);
      out.raw = raw;
      return out;
    }
  }
  throw UrlError(UrlErrorKind::kUnknownTld, "no recognized TLD in host");
}

std::string normalize_url(const std::string& raw) {
  if (raw.empty()) throw UrlError(UrlErrorKind::kNoScheme, "empty URL");
  UrlComponents comps = parse_components(raw);
  std::string out = comps.scheme == Scheme::kHttps ? "https://" : "http://";
  for (size_t i = 0; i < comps.host_labels.size(); ++i) {
    if (i) out.push_back('.');
    out += comps.host_labels[i];
  }
  out += comps.path;
  return out;
}

std::vector<UrlRecord> dedup_records(const std::vector<UrlRecord>& records) {
  std::vector<UrlRecord> out;
  std::unordered_map<std::string, size_t> index;
  index.reserve(records.size());
  for (const auto& rec : records) {
    auto [it, inserted] = index.try_emplace(rec.url, out.size());
    if (inserted) {
      out.push_back(rec);
    } else if (rec.first_seen < out[it->second].first_seen) {
      out[it->second] = rec;
    }
  }
  return out;
}

namespace {

const char kDatasetHeader[] = "url,label,first_seen,ips,ttl";

std::optional<std::vector<uint32_t>> parse_ip_list(const std::string& field) {
  std::vector<uint32_t> ips;
  if (field.empty()) return ips;
  size_t i = 0;
  while (i <= field.size()) {
    size_t semi = field.find(';', i);
    std::string_view part =
        std::string_view(field).substr(i, (semi == std::string::npos ? field.size() : semi) - i);
    auto ip = parse_ipv4(part);
    if (!ip) return std::nullopt;
    ips.push_back(*ip);
    if (semi == std::string::npos) break;
    i = semi + 1;
  }
  return ips;
}

std::optional<uint32_t> parse_ttl(const std::string& field) {
  if (field.empty()) return 0u;
  uint64_t v = 0;
  for (char c : field) {
    if (c < '0' || c > '9') return std::nullopt;
    v = v * 10 + static_cast<uint64_t>(c - '0');
    if (v > 0xffffffffull) return std::nullopt;
  }
  return static_cast<uint32_t>(v);
}

}  // namespace

DatasetLoadResult load_dataset(const std::string& path, const TldRegistry& registry,
                               bool strict) {
  auto rows = csv::read_file(path);
  if (rows.empty()) throw IoError("empty dataset file " + path);
  if (csv::join_row(rows[0].fields) != kDatasetHeader)
    throw MalformedRowError(rows[0].line, "expected header '" + std::string(kDatasetHeader) + "'");

  DatasetLoadResult result;
  result.records.reserve(rows.size() - 1);
  for (size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    auto fail = [&](const std::string& reason) {
      if (strict) throw MalformedRowError(row.line, reason);
      result.skipped.push_back({row.line, reason});
    };
    if (row.fields.size() != 5) {
      fail("expected 5 columns, got " + std::to_string(row.fields.size()));
      continue;
    }
    UrlRecord rec;
    try {
      ParsedUrl parsed = parse_url(row.fields[0], registry);
      rec.url = parsed.canonical();
    } catch (const UrlError& e) {
      fail(std::string("invalid url: ") + e.what());
      continue;
    }
    if (rec.url != row.fields[0]) {
      fail("url is not in canonical form");
      continue;
    }
    auto label = parse_label(row.fields[1]);
    if (!label) {
      fail("unknown label '" + row.fields[1] + "'");
      continue;
    }
    rec.label = *label;
    auto ts = parse_iso8601(row.fields[2]);
    if (!ts) {
      fail("bad first_seen timestamp '" + row.fields[2] + "'");
      continue;
    }
    rec.first_seen = *ts;
    auto ips = parse_ip_list(row.fields[3]);
    if (!ips) {
      fail("bad ips field '" + row.fields[3] + "'");
      continue;
    }
    rec.ips = std::move(*ips);
    auto ttl = parse_ttl(row.fields[4]);
    if (!ttl) {
      fail("bad ttl '" + row.fields[4] + "'");
      continue;
    }
    rec.ttl = *ttl;
    result.records.push_back(std::move(rec));
  }
  return result;
}

void save_dataset(const std::string& path, const std::vector<UrlRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << kDatasetHeader << "\n";
  for (const auto& rec : records) {
    std::string ips;
    for (size_t i = 0; i < rec.ips.size(); ++i) {
      if (i) ips.push_back(';');
      ips += format_ipv4(rec.ips[i]);
    }
    out << csv::join_row({rec.url, label_name(rec.label), format_iso8601(rec.first_seen), ips,
                          std::to_string(rec.ttl)})
        << "\n";
  }
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace urlbench
