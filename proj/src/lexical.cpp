#include "urlbench/lexical.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>

#include "urlbench/errors.hpp"

namespace urlbench::lexical {

double entropy(std::string_view s, EntropyMode mode) {
  if (s.empty()) return 0.0;
  std::array<int, 256> counts{};
  int distinct = 0;
  for (unsigned char c : s) {
    if (counts[c]++ == 0) ++distinct;
  }
  if (distinct <= 1) return 0.0;
  double base = mode == EntropyMode::kDistinctBase ? static_cast<double>(distinct) : 2.0;
  double inv_log_base = 1.0 / std::log(base);
  double n = static_cast<double>(s.size());
  double h = 0.0;
  for (int c = 0; c < 256; ++c) {
    if (counts[c] == 0) continue;
    double p = counts[c] / n;
    h -= p * std::log(p) * inv_log_base;
  }
  return h;
}

TldVocab::TldVocab(std::vector<std::string> entries) : entries_(std::move(entries)) {
  for (size_t i = 0; i < entries_.size(); ++i) index_[entries_[i]] = static_cast<int>(i);
}

TldVocab TldVocab::build(const std::vector<UrlRecord>& records, const TldRegistry& registry,
                         int k) {
  if (records.empty()) throw EmptyCorpusError("cannot build TLD vocab from an empty corpus");
  if (k < 1) throw ConfigError("tld_vocab_k must be >= 1");
  std::map<std::string, int64_t> counts;
  for (const auto& rec : records) {
    ParsedUrl parsed = parse_url(rec.url, registry);
    ++counts[parsed.tld];
  }
  std::vector<std::pair<std::string, int64_t>> items(counts.begin(), counts.end());
  std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> entries;
  for (const auto& [tld, n] : items) {
    if (static_cast<int>(entries.size()) >= k) break;
    entries.push_back(tld);
  }
  return TldVocab(std::move(entries));
}

int TldVocab::slot(const std::string& tld) const {
  auto it = index_.find(tld);
  return it == index_.end() ? static_cast<int>(entries_.size()) : it->second;
}

void TldVocab::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  for (const auto& e : entries_) out << e << "\n";
}

TldVocab TldVocab::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::string> entries;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) entries.push_back(line);
  }
  return TldVocab(std::move(entries));
}

std::vector<int> LexicalLayout::count_indices() const {
  return {kDomainHyphens, kDomainDigits, kDomainChars, kSubdomainCount,
          path_at(),      path_percent(), path_asterisk(), path_ampersand(),
          path_lparen(),  path_rparen(),  path_subdirs(),  url_spaces()};
}

std::vector<float> extract_lexical(const ParsedUrl& url, const TldVocab& vocab,
                                   EntropyMode mode) {
  LexicalLayout layout(vocab.size());
  std::vector<float> v(layout.dim(), 0.0f);

  v[LexicalLayout::kProtocol] = url.scheme == Scheme::kHttps ? 1.0f : 0.0f;

  int hyphens = 0, digits = 0;
  for (char c : url.domain) {
    if (c == '-') ++hyphens;
    if (c >= '0' && c <= '9') ++digits;
  }
  v[LexicalLayout::kDomainHyphens] = static_cast<float>(hyphens);
  v[LexicalLayout::kDomainDigits] = static_cast<float>(digits);
  v[LexicalLayout::kDomainChars] = static_cast<float>(url.domain.size());
  v[LexicalLayout::kDomainEntropy] = static_cast<float>(entropy(url.domain, mode));
  v[LexicalLayout::kSubdomainCount] = static_cast<float>(url.subdomains.size());

  v[LexicalLayout::kTldOneHot + vocab.slot(url.tld)] = 1.0f;

  int at = 0, pct = 0, star = 0, amp = 0, lpar = 0, rpar = 0, slashes = 0;
  for (char c : url.path) {
    switch (c) {
      case '@': ++at; break;
      case '%': ++pct; break;
      case '*': ++star; break;
      case '&': ++amp; break;
      case '(': ++lpar; break;
      case ')': ++rpar; break;
      case '/': ++slashes; break;
      default: break;
    }
  }
  v[layout.path_at()] = static_cast<float>(at);
  v[layout.path_percent()] = static_cast<float>(pct);
  v[layout.path_asterisk()] = static_cast<float>(star);
  v[layout.path_ampersand()] = static_cast<float>(amp);
  v[layout.path_lparen()] = static_cast<float>(lpar);
  v[layout.path_rparen()] = static_cast<float>(rpar);
  v[layout.path_subdirs()] = static_cast<float>(slashes);

  std::string canon = url.canonical();
  int spaces = static_cast<int>(std::count(canon.begin(), canon.end(), ' '));
  v[layout.url_spaces()] = static_cast<float>(spaces);
  v[layout.url_entropy()] = static_cast<float>(entropy(canon, mode));
  return v;
}

}  // namespace urlbench::lexical
