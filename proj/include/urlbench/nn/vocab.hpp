#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace urlbench::nn {

/// Fixed character inventory: PAD, UNK, then printable ASCII 0x20..0x7E.
struct CharVocab {
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  static int id_of(char c) {
    unsigned char uc = static_cast<unsigned char>(c);
    if (uc >= 0x20 && uc <= 0x7e) return 2 + (uc - 0x20);
    return kUnk;
  }
  static bool id_is_alnum(int id) {
    if (id < 2) return false;
    char c = static_cast<char>(0x20 + id - 2);
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
  }
  static constexpr int size() { return 2 + 95; }
};

/// Top-W training words plus PAD and UNK. Word ids are stable across save
/// and load (insertion order is the ranked order).
class WordVocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  WordVocab() = default;
  explicit WordVocab(std::vector<std::string> words);

  /// Ranked by descending frequency over the corpus word stream, ties broken
  /// lexicographically ascending.
  static WordVocab build(const std::vector<std::string>& urls, int max_words);

  int id_of(const std::string& word) const {
    auto it = index_.find(word);
    return it == index_.end() ? kUnk : it->second;
  }
  int size() const { return 2 + static_cast<int>(words_.size()); }
  const std::vector<std::string>& words() const { return words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> index_;
};

/// URLNet-style segmentation: maximal alphanumeric runs are words and every
/// other character is its own single-character token.
std::vector<std::string> segment_words(std::string_view url);

struct TokenizedUrl {
  std::vector<int> char_ids;            // fixed length L, PAD-filled tail
  std::vector<int> word_ids;            // fixed length M
  std::vector<std::vector<int>> spans;  // per word slot: char ids for enrichment
  int n_words = 0;                      // valid word slots (at least 1 for any URL)
};

/// Word spans recovered from a PAD-terminated char-id sequence. Used both by
/// tokenize() and by the featurized-file loader so the two stay consistent.
std::vector<std::vector<int>> derive_word_spans(const std::vector<int>& char_ids, int max_words);

TokenizedUrl tokenize(const std::string& url, const WordVocab& vocab, int char_seq_len,
                      int word_seq_len);

}  // namespace urlbench::nn
