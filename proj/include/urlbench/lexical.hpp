#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "urlbench/url.hpp"

namespace urlbench::lexical {

enum class EntropyMode : uint8_t {
  kDistinctBase,  // log base = number of distinct characters; result in [0,1]
  kBase2,
};

/// Shannon entropy over character frequencies. With kDistinctBase the
/// logarithm base is the count of distinct characters, so the value is
/// normalized to [0,1]; strings with fewer than two distinct characters
/// score 0.
double entropy(std::string_view s, EntropyMode mode = EntropyMode::kDistinctBase);

/// The K most frequent TLDs of a training corpus, descending frequency with
/// lexicographic tie-break. Extraction maps anything else to an implicit
/// "other" slot.
class TldVocab {
 public:
  TldVocab() = default;
  explicit TldVocab(std::vector<std::string> entries);

  static TldVocab build(const std::vector<UrlRecord>& records, const TldRegistry& registry,
                        int k);

  /// Slot for a TLD: its index, or size() for out-of-vocab.
  int slot(const std::string& tld) const;
  int size() const { return static_cast<int>(entries_.size()); }
  const std::vector<std::string>& entries() const { return entries_; }

  void save(const std::string& path) const;
  static TldVocab load(const std::string& path);

 private:
  std::vector<std::string> entries_;
  std::unordered_map<std::string, int> index_;
};

/// Fixed positions inside the lexical vector. The one-hot block occupies
/// [kTldOneHot, kTldOneHot + vocab + 1).
struct LexicalLayout {
  static constexpr int kProtocol = 0;
  static constexpr int kDomainHyphens = 1;
  static constexpr int kDomainDigits = 2;
  static constexpr int kDomainChars = 3;
  static constexpr int kDomainEntropy = 4;
  static constexpr int kSubdomainCount = 5;
  static constexpr int kTldOneHot = 6;

  explicit LexicalLayout(int tld_vocab_size) : tld_slots(tld_vocab_size + 1) {}

  int tld_slots;
  int path_base() const { return kTldOneHot + tld_slots; }
  int path_at() const { return path_base() + 0; }
  int path_percent() const { return path_base() + 1; }
  int path_asterisk() const { return path_base() + 2; }
  int path_ampersand() const { return path_base() + 3; }
  int path_lparen() const { return path_base() + 4; }
  int path_rparen() const { return path_base() + 5; }
  int path_subdirs() const { return path_base() + 6; }
  int url_spaces() const { return path_base() + 7; }
  int url_entropy() const { return path_base() + 8; }
  int dim() const { return path_base() + 9; }

  /// Indices of unbounded count features (candidates for z-scoring in the
  /// model; entropies, the protocol flag and the one-hot block pass through).
  std::vector<int> count_indices() const;
};

std::vector<float> extract_lexical(const ParsedUrl& url, const TldVocab& vocab,
                                   EntropyMode mode = EntropyMode::kDistinctBase);

}  // namespace urlbench::lexical
