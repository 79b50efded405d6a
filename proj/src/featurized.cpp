#include "urlbench/nn/featurized.hpp"

#include <cstring>
#include <fstream>

#include "urlbench/errors.hpp"

namespace urlbench::nn {

namespace {

constexpr char kMagic[4] = {'U', 'R', 'L', 'F'};
constexpr uint16_t kVersion = 1;

template <typename T>
void put_pod(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T get_pod(const std::string& buf, size_t& pos) {
  if (pos + sizeof(T) > buf.size())
    throw ChecksumMismatchError("featurized file is truncated");
  T v;
  std::memcpy(&v, buf.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

template <typename T>
void put_array(std::string& out, const std::vector<T>& v) {
  size_t bytes = v.size() * sizeof(T);
  size_t at = out.size();
  out.resize(at + bytes);
  std::memcpy(out.data() + at, v.data(), bytes);
}

template <typename T>
void get_array(const std::string& buf, size_t& pos, std::vector<T>& v, size_t n) {
  size_t bytes = n * sizeof(T);
  if (pos + bytes > buf.size())
    throw ChecksumMismatchError("featurized file is truncated");
  v.resize(n);
  std::memcpy(v.data(), buf.data() + pos, bytes);
  pos += bytes;
}

}  // namespace

void save_featurized(const FeaturizedFile& file, const std::string& path) {
  std::string out;
  out.append(kMagic, 4);
  put_pod<uint16_t>(out, kVersion);
  std::string text = meta_to_text(file.meta);
  put_pod<uint32_t>(out, static_cast<uint32_t>(text.size()));
  out += text;
  put_pod<uint64_t>(out, file.records.size());
  for (const auto& rec : file.records) {
    put_array(out, rec.char_ids);
    put_array(out, rec.word_ids);
    put_array(out, rec.lex);
    put_array(out, rec.dns);
    put_pod<uint8_t>(out, static_cast<uint8_t>(rec.label));
    put_pod<int64_t>(out, rec.first_seen);
  }

  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write featurized file " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("failed writing featurized file " + path);
}

FeaturizedFile load_featurized(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open featurized file " + path);
  std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

  if (buf.size() < 6 || std::memcmp(buf.data(), kMagic, 4) != 0)
    throw VersionMismatchError("not a featurized file (bad magic)");
  size_t pos = 4;
  uint16_t version = get_pod<uint16_t>(buf, pos);
  if (version != kVersion)
    throw VersionMismatchError("unsupported featurized version " + std::to_string(version));

  FeaturizedFile file;
  uint32_t text_len = get_pod<uint32_t>(buf, pos);
  if (pos + text_len > buf.size())
    throw ChecksumMismatchError("featurized file is truncated");
  file.meta = meta_from_text(buf.substr(pos, text_len));
  pos += text_len;

  size_t l = static_cast<size_t>(file.meta.cfg.char_seq_len);
  size_t m = static_cast<size_t>(file.meta.cfg.word_seq_len);
  size_t lex_dim = lexical::LexicalLayout(file.meta.tld_vocab.size()).dim();
  size_t dns_dim = file.meta.dns_vocab.dim();

  uint64_t n = get_pod<uint64_t>(buf, pos);
  file.records.resize(n);
  for (uint64_t i = 0; i < n; ++i) {
    FeaturizedRecord& rec = file.records[i];
    get_array(buf, pos, rec.char_ids, l);
    get_array(buf, pos, rec.word_ids, m);
    get_array(buf, pos, rec.lex, lex_dim);
    get_array(buf, pos, rec.dns, dns_dim);
    uint8_t label = get_pod<uint8_t>(buf, pos);
    if (label > 2) throw ChecksumMismatchError("bad label value in featurized file");
    rec.label = static_cast<Label>(label);
    rec.first_seen = get_pod<int64_t>(buf, pos);
  }
  if (pos != buf.size())
    throw ChecksumMismatchError("trailing bytes in featurized file");
  return file;
}

TrainSample to_train_sample(const FeaturizedRecord& rec, const ArtifactMeta& meta) {
  TrainSample s;
  s.tok.char_ids.assign(rec.char_ids.begin(), rec.char_ids.end());
  s.tok.word_ids.assign(rec.word_ids.begin(), rec.word_ids.end());
  s.tok.spans = derive_word_spans(s.tok.char_ids, meta.cfg.word_seq_len);
  s.tok.n_words = 0;
  for (uint32_t id : rec.word_ids) {
    if (id == WordVocab::kPad) break;
    ++s.tok.n_words;
  }
  s.lex = rec.lex;
  s.dns = rec.dns;
  s.label = rec.label;
  s.first_seen = rec.first_seen;
  return s;
}

}  // namespace urlbench::nn
