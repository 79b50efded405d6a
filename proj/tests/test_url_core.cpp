#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "urlbench/errors.hpp"
#include "urlbench/nn/tensor.hpp"
#include "urlbench/url.hpp"

using namespace urlbench;

namespace {

TldRegistry test_registry() {
  return TldRegistry::from_list({"com", "org", "net", "io", "uk", "co.uk", "info"});
}

std::string tmp_file(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

// Random-but-valid URL generator for property tests.
std::string random_url(nn::Rng& rng) {
  static const char* tlds[] = {"com", "org", "net", "io", "co.uk"};
  static const char* words[] = {"alpha", "beta", "shop", "mail", "login",
                                "cdn",   "img",  "x9",   "a-b",  "news"};
  std::string url = rng.next_below(2) ? "https://" : "http://";
  int n_sub = static_cast<int>(rng.next_below(3));
  for (int i = 0; i < n_sub; ++i) {
    url += words[rng.next_below(10)];
    url += ".";
  }
  url += words[rng.next_below(10)];
  url += ".";
  url += tlds[rng.next_below(5)];
  int n_seg = static_cast<int>(rng.next_below(4));
  for (int i = 0; i < n_seg; ++i) {
    url += "/";
    url += words[rng.next_below(10)];
  }
  if (n_seg && rng.next_below(2)) url += "/";
  return url;
}

}  // namespace

TEST_CASE("parse_url decomposes subdomains, domain, tld and path") {
  auto reg = test_registry();
  ParsedUrl p = parse_url("https://login.bank.example.com/a/b", reg);
  CHECK(p.scheme == Scheme::kHttps);
  REQUIRE(p.subdomains.size() == 2);
  CHECK(p.subdomains[0] == "login");
  CHECK(p.subdomains[1] == "bank");
  CHECK(p.domain == "example");
  CHECK(p.tld == "com");
  CHECK(p.path == "/a/b");
  CHECK(p.canonical() == "https://login.bank.example.com/a/b");
}

TEST_CASE("parse_url honors multi-label suffixes by longest match") {
  auto reg = test_registry();
  ParsedUrl p = parse_url("http://www.example.co.uk", reg);
  CHECK(p.tld == "co.uk");
  CHECK(p.domain == "example");
  REQUIRE(p.subdomains.size() == 1);
  CHECK(p.subdomains[0] == "www");
}

TEST_CASE("parse_url error taxonomy") {
  auto reg = test_registry();
  auto kind_of = [&](const std::string& raw) {
    try {
      parse_url(raw, reg);
    } catch (const UrlError& e) {
      return e.kind();
    }
    FAIL("expected UrlError for ", raw);
    return UrlErrorKind::kNoScheme;
  };
  CHECK(kind_of("ftp://example.com/") == UrlErrorKind::kNoScheme);
  CHECK(kind_of("example.com/path") == UrlErrorKind::kNoScheme);
  CHECK(kind_of("") == UrlErrorKind::kNoScheme);
  CHECK(kind_of("http://192.168.1.1/x") == UrlErrorKind::kIpLiteralHost);
  CHECK(kind_of("https://255.0.0.255") == UrlErrorKind::kIpLiteralHost);
  CHECK(kind_of("https://example.zzzz/") == UrlErrorKind::kUnknownTld);
  CHECK(kind_of("https://localhost") == UrlErrorKind::kUnknownTld);
  CHECK(kind_of("http://ex..com/") == UrlErrorKind::kMalformedHost);
  CHECK(kind_of("http://.example.com") == UrlErrorKind::kMalformedHost);
  CHECK(kind_of("http://example.com.") == UrlErrorKind::kMalformedHost);
  CHECK(kind_of("http://user:pw@example.com/") == UrlErrorKind::kMalformedHost);
  CHECK(kind_of("http://example.com:8080/") == UrlErrorKind::kMalformedHost);
  CHECK(kind_of("https://example.com:80/") == UrlErrorKind::kMalformedHost);
  CHECK(kind_of("http://exa mple.com/") == UrlErrorKind::kMalformedHost);
  CHECK(kind_of("http://ex_ample.com/") == UrlErrorKind::kMalformedHost);
  CHECK(kind_of("http://-bad.example.com/") == UrlErrorKind::kMalformedHost);
  CHECK(kind_of("http://caf\xc3\xa9.com/") == UrlErrorKind::kMalformedHost);
}

TEST_CASE("default ports are elided, punycode accepted") {
  auto reg = test_registry();
  CHECK(parse_url("http://example.com:80/p", reg).canonical() == "http://example.com/p");
  CHECK(parse_url("https://example.com:443/p", reg).canonical() == "https://example.com/p");
  CHECK(parse_url("http://xn--caf-dma.com/", reg).domain == "xn--caf-dma");
}

TEST_CASE("999.1.1.1 is not an IP literal but fails TLD validation") {
  auto reg = test_registry();
  try {
    parse_url("http://999.1.1.1/", reg);
    FAIL("expected UrlError");
  } catch (const UrlError& e) {
    CHECK(e.kind() == UrlErrorKind::kUnknownTld);
  }
}

TEST_CASE("normalize_url strips query, fragment and default ports") {
  // hand-derived canonical forms
  CHECK(normalize_url("HTTP://Example.COM/Path?q=1#frag") == "http://example.com/Path");
  CHECK(normalize_url("https://a.b.com/x") == "https://a.b.com/x");
  CHECK(normalize_url("http://site.org:80/p") == "http://site.org/p");
  CHECK(normalize_url("https://site.org:443/p") == "https://site.org/p");
  CHECK(normalize_url("http://x.com?") == "http://x.com");
  CHECK(normalize_url("http://x.com/#") == "http://x.com/");
  CHECK(normalize_url("http://X.com/A/B/") == "http://x.com/A/B/");
}

TEST_CASE("normalize_url is idempotent on random URLs") {
  nn::Rng rng(42);
  for (int i = 0; i < 2000; ++i) {
    std::string url = random_url(rng);
    std::string once = normalize_url(url);
    CHECK(normalize_url(once) == once);
  }
}

TEST_CASE("parse -> reassemble -> parse is a fixed point") {
  auto reg = test_registry();
  nn::Rng rng(7);
  for (int i = 0; i < 2000; ++i) {
    std::string url = random_url(rng);
    ParsedUrl p1 = parse_url(url, reg);
    std::string canon = p1.canonical();
    ParsedUrl p2 = parse_url(canon, reg);
    CHECK(p2.canonical() == canon);
    CHECK(p2.domain == p1.domain);
    CHECK(p2.tld == p1.tld);
    CHECK(p2.subdomains == p1.subdomains);
    CHECK(p2.path == p1.path);
  }
}

TEST_CASE("dedup keeps the earliest first_seen") {
  UrlRecord a{"http://a.com/x", Label::kBenign, 100, {}, 0};
  UrlRecord b{"http://a.com/x", Label::kBenign, 50, {0x01020304}, 60};
  auto out = dedup_records({a, b});
  REQUIRE(out.size() == 1);
  CHECK(out[0].first_seen == 50);
  CHECK(out[0].ips.size() == 1);  // whole earliest row survives

  CHECK(dedup_records({}).empty());
}

TEST_CASE("dedup matches a brute-force group-by-min oracle") {
  nn::Rng rng(99);
  std::vector<UrlRecord> records;
  std::vector<std::string> urls;
  for (int i = 0; i < 100; ++i) urls.push_back("http://site" + std::to_string(i) + ".com/p");
  for (int i = 0; i < 1000; ++i) {
    UrlRecord rec;
    rec.url = urls[rng.next_below(100)];
    rec.first_seen = static_cast<Timestamp>(rng.next_below(1000000));
    records.push_back(rec);
  }

  // oracle: independent group-by with min timestamp
  std::map<std::string, Timestamp> oracle;
  for (const auto& rec : records) {
    auto it = oracle.find(rec.url);
    if (it == oracle.end() || rec.first_seen < it->second) oracle[rec.url] = rec.first_seen;
  }

  auto out = dedup_records(records);
  CHECK(out.size() == oracle.size());
  for (const auto& rec : out) {
    REQUIRE(oracle.count(rec.url) == 1);
    CHECK(rec.first_seen == oracle[rec.url]);
  }
  // survivor order equals first-occurrence order
  std::vector<std::string> first_occurrence;
  for (const auto& rec : records)
    if (std::find(first_occurrence.begin(), first_occurrence.end(), rec.url) ==
        first_occurrence.end())
      first_occurrence.push_back(rec.url);
  for (size_t i = 0; i < out.size(); ++i) CHECK(out[i].url == first_occurrence[i]);
}

TEST_CASE("dataset round-trip and validation") {
  auto reg = test_registry();
  std::string path = tmp_file("urlbench_test_dataset.csv");
  {
    std::ofstream f(path);
    f << "url,label,first_seen,ips,ttl\n";
    f << "http://a.com/x,benign,2022-09-01T00:00:00Z,1.2.3.4;5.6.7.8,300\n";
    f << "https://b.org,malware,2021-01-15T12:30:00Z,,0\n";
    f << "http://c.net/p,phishing,2022-12-31T23:59:59Z,9.9.9.9,86400\n";
  }
  auto loaded = load_dataset(path, reg);
  CHECK(loaded.skipped.empty());
  REQUIRE(loaded.records.size() == 3);
  CHECK(loaded.records[0].ips.size() == 2);
  CHECK(loaded.records[0].ips[0] == 0x01020304u);
  CHECK(loaded.records[1].label == Label::kMalware);
  CHECK(loaded.records[1].ips.empty());
  CHECK(format_iso8601(loaded.records[0].first_seen) == "2022-09-01T00:00:00Z");

  std::string path2 = tmp_file("urlbench_test_dataset2.csv");
  save_dataset(path2, loaded.records);
  auto again = load_dataset(path2, reg, /*strict=*/true);
  REQUIRE(again.records.size() == 3);
  for (size_t i = 0; i < 3; ++i) {
    CHECK(again.records[i].url == loaded.records[i].url);
    CHECK(again.records[i].first_seen == loaded.records[i].first_seen);
    CHECK(again.records[i].ips == loaded.records[i].ips);
    CHECK(again.records[i].ttl == loaded.records[i].ttl);
  }
}

TEST_CASE("load_dataset rejects unknown labels and bad rows") {
  auto reg = test_registry();
  std::string path = tmp_file("urlbench_test_badrows.csv");
  {
    std::ofstream f(path);
    f << "url,label,first_seen,ips,ttl\n";
    f << "http://a.com/x,suspicious,2022-09-01T00:00:00Z,,0\n";
    f << "http://b.com/x,benign,not-a-date,,0\n";
    f << "HTTP://c.com/x,benign,2022-09-01T00:00:00Z,,0\n";  // not canonical
    f << "http://d.com/x,benign,2022-09-01T00:00:00Z,,0\n";
  }
  auto loaded = load_dataset(path, reg);
  REQUIRE(loaded.records.size() == 1);
  CHECK(loaded.records[0].url == "http://d.com/x");
  CHECK(loaded.skipped.size() == 3);
  CHECK(loaded.skipped[0].line == 2);

  CHECK_THROWS_AS(load_dataset(path, reg, /*strict=*/true), MalformedRowError);
}

TEST_CASE("timestamp helpers") {
  auto ts = parse_iso8601("2022-09-01T00:00:00Z");
  REQUIRE(ts.has_value());
  CHECK(*ts == 1661990400);  // independently checked epoch value
  CHECK(parse_iso8601("2022-09-01").value() == *ts);
  CHECK(!parse_iso8601("2022-13-01").has_value());
  CHECK(!parse_iso8601("2022-02-30").has_value());
  CHECK(!parse_iso8601("garbage").has_value());

  // month arithmetic with day clamping
  auto mar31 = *parse_iso8601("2023-03-31T10:00:00Z");
  CHECK(format_iso8601(subtract_months(mar31, 1)) == "2023-02-28T10:00:00Z");
  CHECK(format_iso8601(subtract_months(mar31, 2)) == "2023-01-31T10:00:00Z");
  auto jan15 = *parse_iso8601("2023-01-15T00:00:00Z");
  CHECK(format_iso8601(subtract_months(jan15, 2)) == "2022-11-15T00:00:00Z");
  CHECK(month_index(*ts) == 2022 * 12 + 8);
  CHECK(format_month(month_index(*ts)) == "2022-09");
}

TEST_CASE("TLD registry loading") {
  std::string path = tmp_file("urlbench_test_tlds.txt");
  {
    std::ofstream f(path);
    f << "# comment line\n";
    f << "com\n";
    f << "ORG\n";
    f << ".net\n";
    f << "\n";
    f << "co.uk\n";
  }
  auto reg = TldRegistry::load(path);
  CHECK(reg.size() == 4);
  CHECK(reg.contains("com"));
  CHECK(reg.contains("org"));
  CHECK(reg.contains("net"));
  CHECK(reg.contains("co.uk"));
  CHECK(reg.max_labels() == 2);
}
