#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "urlbench/errors.hpp"
#include "urlbench/lexical.hpp"
#include "urlbench/nn/tensor.hpp"

using namespace urlbench;
using namespace urlbench::lexical;

namespace {

TldRegistry test_registry() {
  return TldRegistry::from_list({"com", "org", "net", "io", "co.uk"});
}

UrlRecord rec(const std::string& url) {
  UrlRecord r;
  r.url = url;
  return r;
}

// Independent feature oracle: plain character scans straight off the
// definitions, no shared code with extract_lexical.
std::vector<float> scan_oracle(const ParsedUrl& u, const TldVocab& vocab) {
  auto count_char = [](const std::string& s, char c) {
    return static_cast<float>(std::count(s.begin(), s.end(), c));
  };
  auto entropy_norm = [](const std::string& s) {
    int hist[256] = {0};
    for (unsigned char c : s) hist[c]++;
    int distinct = 0;
    for (int i = 0; i < 256; ++i)
      if (hist[i]) ++distinct;
    if (distinct < 2) return 0.0;
    double h = 0.0;
    for (int i = 0; i < 256; ++i) {
      if (!hist[i]) continue;
      double p = double(hist[i]) / double(s.size());
      h -= p * std::log(p) / std::log(double(distinct));
    }
    return h;
  };

  std::vector<float> v;
  v.push_back(u.scheme == Scheme::kHttps ? 1.0f : 0.0f);
  v.push_back(count_char(u.domain, '-'));
  float digits = 0;
  for (char c : u.domain)
    if (c >= '0' && c <= '9') digits += 1;
  v.push_back(digits);
  v.push_back(static_cast<float>(u.domain.size()));
  v.push_back(static_cast<float>(entropy_norm(u.domain)));
  v.push_back(static_cast<float>(u.subdomains.size()));
  std::vector<float> onehot(vocab.size() + 1, 0.0f);
  int slot = vocab.size();
  for (int i = 0; i < vocab.size(); ++i)
    if (vocab.entries()[i] == u.tld) slot = i;
  onehot[slot] = 1.0f;
  v.insert(v.end(), onehot.begin(), onehot.end());
  v.push_back(count_char(u.path, '@'));
  v.push_back(count_char(u.path, '%'));
  v.push_back(count_char(u.path, '*'));
  v.push_back(count_char(u.path, '&'));
  v.push_back(count_char(u.path, '('));
  v.push_back(count_char(u.path, ')'));
  v.push_back(count_char(u.path, '/'));
  std::string canon = u.canonical();
  v.push_back(count_char(canon, ' '));
  v.push_back(static_cast<float>(entropy_norm(canon)));
  return v;
}

}  // namespace

TEST_CASE("entropy closed-form values") {
  CHECK(entropy("aaaa") == doctest::Approx(0.0));
  CHECK(entropy("abab") == doctest::Approx(1.0));
  // -(2/3 log2 2/3 + 1/3 log2 1/3) = 0.91829583
  CHECK(entropy("aab") == doctest::Approx(0.9182958340544896).epsilon(1e-4));
  CHECK(entropy("") == doctest::Approx(0.0));
  CHECK(entropy("a") == doctest::Approx(0.0));
  // base-2 override: uniform 4 symbols gives 2 bits
  CHECK(entropy("abcd", EntropyMode::kBase2) == doctest::Approx(2.0));
  CHECK(entropy("abcd", EntropyMode::kDistinctBase) == doctest::Approx(1.0));
}

TEST_CASE("entropy is permutation invariant and within [0,1]") {
  nn::Rng rng(5);
  for (int iter = 0; iter < 500; ++iter) {
    std::string s;
    int n = 1 + static_cast<int>(rng.next_below(40));
    for (int i = 0; i < n; ++i)
      s.push_back(static_cast<char>('a' + rng.next_below(6)));
    double h = entropy(s);
    CHECK(h >= 0.0);
    CHECK(h <= 1.0 + 1e-12);
    std::string shuffled = s;
    rng.shuffle(shuffled.begin(), shuffled.end());
    CHECK(entropy(shuffled) == doctest::Approx(h).epsilon(1e-12));
  }
}

TEST_CASE("tld vocab: frequency order, ties lexicographic") {
  auto reg = test_registry();
  std::vector<UrlRecord> records;
  for (int i = 0; i < 5; ++i) records.push_back(rec("http://a" + std::to_string(i) + ".com"));
  for (int i = 0; i < 3; ++i) records.push_back(rec("http://b" + std::to_string(i) + ".org"));
  records.push_back(rec("http://c.io"));

  auto vocab = TldVocab::build(records, reg, 2);
  REQUIRE(vocab.size() == 2);
  CHECK(vocab.entries()[0] == "com");
  CHECK(vocab.entries()[1] == "org");

  // saturation: k larger than distinct count
  auto all = TldVocab::build(records, reg, 10);
  CHECK(all.size() == 3);

  // tie between net x2 and io x2 -> io first
  std::vector<UrlRecord> tied;
  tied.push_back(rec("http://a.net"));
  tied.push_back(rec("http://b.net"));
  tied.push_back(rec("http://c.io"));
  tied.push_back(rec("http://d.io"));
  auto tv = TldVocab::build(tied, reg, 2);
  CHECK(tv.entries()[0] == "io");
  CHECK(tv.entries()[1] == "net");

  CHECK_THROWS_AS(TldVocab::build({}, reg, 2), EmptyCorpusError);
}

TEST_CASE("extract_lexical matches hand counts") {
  auto reg = test_registry();
  TldVocab vocab({"com", "org"});
  LexicalLayout layout(vocab.size());

  auto v = extract_lexical(parse_url("https://a-b1.com/", reg), vocab);
  REQUIRE(static_cast<int>(v.size()) == layout.dim());
  CHECK(v[LexicalLayout::kProtocol] == 1.0f);
  CHECK(v[LexicalLayout::kDomainHyphens] == 1.0f);
  CHECK(v[LexicalLayout::kDomainDigits] == 1.0f);
  CHECK(v[LexicalLayout::kDomainChars] == 4.0f);
  CHECK(v[LexicalLayout::kSubdomainCount] == 0.0f);
  // "a-b1": 4 distinct chars, uniform -> normalized entropy 1
  CHECK(v[LexicalLayout::kDomainEntropy] == doctest::Approx(1.0f));
  CHECK(v[LexicalLayout::kTldOneHot + 0] == 1.0f);  // com
  CHECK(v[LexicalLayout::kTldOneHot + 1] == 0.0f);

  auto w = extract_lexical(parse_url("http://x.com/a/b/c", reg), vocab);
  CHECK(w[LexicalLayout::kProtocol] == 0.0f);
  CHECK(w[layout.path_subdirs()] == 3.0f);
  CHECK(w[layout.path_at()] == 0.0f);
  CHECK(w[layout.path_percent()] == 0.0f);
  CHECK(w[layout.path_asterisk()] == 0.0f);
  CHECK(w[layout.path_ampersand()] == 0.0f);
  CHECK(w[layout.path_lparen()] == 0.0f);
  CHECK(w[layout.path_rparen()] == 0.0f);

  // domain "aaaa": single symbol, zero entropy
  auto z = extract_lexical(parse_url("http://aaaa.com", reg), vocab);
  CHECK(z[LexicalLayout::kDomainEntropy] == 0.0f);

  // out-of-vocab TLD activates the other slot
  auto o = extract_lexical(parse_url("http://x.io/%(a)@*&", reg), vocab);
  CHECK(o[LexicalLayout::kTldOneHot + 2] == 1.0f);
  CHECK(o[layout.path_percent()] == 1.0f);
  CHECK(o[layout.path_lparen()] == 1.0f);
  CHECK(o[layout.path_rparen()] == 1.0f);
  CHECK(o[layout.path_at()] == 1.0f);
  CHECK(o[layout.path_asterisk()] == 1.0f);
  CHECK(o[layout.path_ampersand()] == 1.0f);
}

TEST_CASE("exactly one TLD slot is active and width is stable") {
  auto reg = test_registry();
  TldVocab vocab({"com", "org", "net"});
  LexicalLayout layout(vocab.size());
  nn::Rng rng(11);
  static const char* tlds[] = {"com", "org", "net", "io", "co.uk"};
  for (int i = 0; i < 200; ++i) {
    std::string url = "http://dom" + std::to_string(rng.next_below(50)) + "." +
                      tlds[rng.next_below(5)];
    auto v = extract_lexical(parse_url(url, reg), vocab);
    CHECK(static_cast<int>(v.size()) == layout.dim());
    float active = 0;
    for (int s = 0; s < vocab.size() + 1; ++s) active += v[LexicalLayout::kTldOneHot + s];
    CHECK(active == 1.0f);
  }
}

TEST_CASE("all features equal the character-scan oracle on random URLs") {
  auto reg = test_registry();
  TldVocab vocab({"com", "org"});
  nn::Rng rng(3);
  static const char* tlds[] = {"com", "org", "net", "io"};
  static const char* segs[] = {"a", "b9", "x-y", "download", "login%20", "img(1)", "a@b",
                               "q*r&s"};
  for (int i = 0; i < 1000; ++i) {
    std::string url = rng.next_below(2) ? "https://" : "http://";
    if (rng.next_below(3) == 0) url += "www.";
    url += "dom" + std::to_string(rng.next_below(30)) + "-" + std::to_string(rng.next_below(10));
    url += ".";
    url += tlds[rng.next_below(4)];
    int n_seg = static_cast<int>(rng.next_below(4));
    for (int s = 0; s < n_seg; ++s) {
      url += "/";
      url += segs[rng.next_below(8)];
    }
    ParsedUrl parsed = parse_url(url, reg);
    auto got = extract_lexical(parsed, vocab);
    auto want = scan_oracle(parsed, vocab);
    REQUIRE(got.size() == want.size());
    for (size_t j = 0; j < got.size(); ++j)
      CHECK(got[j] == doctest::Approx(want[j]).epsilon(1e-6));
  }
}
