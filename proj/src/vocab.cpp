#include "urlbench/nn/vocab.hpp"

#include <algorithm>
#include <map>

#include "urlbench/errors.hpp"

namespace urlbench::nn {

WordVocab::WordVocab(std::vector<std::string> words) : words_(std::move(words)) {
  for (size_t i = 0; i < words_.size(); ++i) index_[words_[i]] = static_cast<int>(i) + 2;
}

WordVocab WordVocab::build(const std::vector<std::string>& urls, int max_words) {
  if (urls.empty()) throw EmptyCorpusError("cannot build word vocab from an empty corpus");
  if (max_words < 1) throw ConfigError("word_vocab_size must be >= 1");
  std::map<std::string, int64_t> counts;
  for (const auto& url : urls)
    for (auto& w : segment_words(url)) ++counts[w];
  std::vector<std::pair<std::string, int64_t>> items(counts.begin(), counts.end());
  std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> words;
  for (auto& [w, n] : items) {
    if (static_cast<int>(words.size()) >= max_words) break;
    words.push_back(w);
  }
  return WordVocab(std::move(words));
}

std::vector<std::string> segment_words(std::string_view url) {
  std::vector<std::string> words;
  std::string run;
  auto flush = [&] {
    if (!run.empty()) {
      words.push_back(run);
      run.clear();
    }
  };
  for (char c : url) {
    bool alnum = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
    if (alnum) {
      run.push_back(c);
    } else {
      flush();
      words.push_back(std::string(1, c));
    }
  }
  flush();
  return words;
}

std::vector<std::vector<int>> derive_word_spans(const std::vector<int>& char_ids, int max_words) {
  std::vector<std::vector<int>> spans;
  std::vector<int> run;
  auto flush = [&] {
    if (!run.empty() && static_cast<int>(spans.size()) < max_words) spans.push_back(run);
    run.clear();
  };
  for (int id : char_ids) {
    if (id == CharVocab::kPad) break;
    if (static_cast<int>(spans.size()) >= max_words) break;
    if (CharVocab::id_is_alnum(id)) {
      run.push_back(id);
    } else {
      flush();
      if (static_cast<int>(spans.size()) < max_words) spans.push_back({id});
    }
  }
  flush();
  spans.resize(max_words);
  return spans;
}

TokenizedUrl tokenize(const std::string& url, const WordVocab& vocab, int char_seq_len,
                      int word_seq_len) {
  TokenizedUrl out;
  out.char_ids.assign(char_seq_len, CharVocab::kPad);
  int n = std::min<int>(char_seq_len, static_cast<int>(url.size()));
  for (int i = 0; i < n; ++i) out.char_ids[i] = CharVocab::id_of(url[i]);

  std::vector<std::string> words = segment_words(url);
  out.n_words = std::min<int>(word_seq_len, static_cast<int>(words.size()));
  out.word_ids.assign(word_seq_len, WordVocab::kPad);
  for (int i = 0; i < out.n_words; ++i) out.word_ids[i] = vocab.id_of(words[i]);

  out.spans = derive_word_spans(out.char_ids, word_seq_len);
  return out;
}

}  // namespace urlbench::nn
