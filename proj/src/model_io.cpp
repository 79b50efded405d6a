#include "urlbench/nn/model_io.hpp"

#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "urlbench/errors.hpp"

namespace urlbench::nn {

namespace {

constexpr char kMagic[4] = {'U', 'R', 'L', 'B'};
constexpr uint16_t kVersion = 1;

bool unreserved(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
         c == '.' || c == '_' || c == '~' || c == '-';
}

int hex_val(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return -1;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  size_t start = 0;
  for (;;) {
    size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

int64_t to_int(const std::string& s, const char* key) {
  try {
    size_t used = 0;
    int64_t v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (...) {
    throw VersionMismatchError(std::string("bad integer for ") + key + ": '" + s + "'");
  }
}

}  // namespace

std::string encode_token(const std::string& s) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  out.reserve(s.size());
  for (unsigned char c : s) {
    if (unreserved(static_cast<char>(c))) {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(hex[c >> 4]);
      out.push_back(hex[c & 0xf]);
    }
  }
  return out;
}

std::string decode_token(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size()) {
      int hi = hex_val(s[i + 1]), lo = hex_val(s[i + 2]);
      if (hi >= 0 && lo >= 0) {
        out.push_back(static_cast<char>((hi << 4) | lo));
        i += 2;
        continue;
      }
    }
    out.push_back(s[i]);
  }
  return out;
}

std::string meta_to_text(const ArtifactMeta& meta) {
  const ModelConfig& c = meta.cfg;
  std::ostringstream out;
  out << "char_seq_len=" << c.char_seq_len << "\n";
  out << "word_seq_len=" << c.word_seq_len << "\n";
  out << "char_emb_dim=" << c.char_emb_dim << "\n";
  out << "word_emb_dim=" << c.word_emb_dim << "\n";
  out << "char_filters=" << c.char_filters << "\n";
  out << "conv_widths=";
  for (size_t i = 0; i < c.conv_widths.size(); ++i)
    out << (i ? ";" : "") << c.conv_widths[i];
  out << "\n";
  out << "word_branch=" << (c.word_branch == WordBranch::kAttention ? "attention" : "conv")
      << "\n";
  out << "word_conv_filters=" << c.word_conv_filters << "\n";
  out << "lex_hidden1=" << c.lex_hidden1 << "\n";
  out << "lex_hidden2=" << c.lex_hidden2 << "\n";
  out << "dns_hidden1=" << c.dns_hidden1 << "\n";
  out << "dns_hidden2=" << c.dns_hidden2 << "\n";
  out << "fusion_dim=" << c.fusion_dim << "\n";
  out << "word_vocab_size=" << c.word_vocab_size << "\n";
  out << "tld_vocab_k=" << c.tld_vocab_k << "\n";
  out << "dns_top_k=" << c.dns_top_k << "\n";
  out << "use_lexical=" << (c.use_lexical ? 1 : 0) << "\n";
  out << "use_dns=" << (c.use_dns ? 1 : 0) << "\n";
  out << "entropy_mode="
      << (c.entropy_mode == lexical::EntropyMode::kDistinctBase ? "distinct" : "base2") << "\n";
  out << "loss_mode=" << (c.loss_mode == LossMode::kMulticlass ? "multiclass" : "binary")
      << "\n";
  out << "cutoff=" << format_iso8601(meta.cutoff) << "\n";

  auto join_encoded = [](const std::vector<std::string>& items) {
    std::string s;
    for (size_t i = 0; i < items.size(); ++i) {
      if (i) s.push_back(',');
      s += encode_token(items[i]);
    }
    return s;
  };
  out << "word_vocab=" << join_encoded(meta.word_vocab.words()) << "\n";
  out << "tld_vocab=" << join_encoded(meta.tld_vocab.entries()) << "\n";
  out << "asn_vocab=";
  for (size_t i = 0; i < meta.dns_vocab.asns.size(); ++i)
    out << (i ? "," : "") << meta.dns_vocab.asns[i];
  out << "\n";
  out << "country_vocab=" << join_encoded(meta.dns_vocab.countries) << "\n";
  out << "isp_vocab=" << join_encoded(meta.dns_vocab.isps) << "\n";
  return out.str();
}

ArtifactMeta meta_from_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  for (const auto& line : split(text, '\n')) {
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw VersionMismatchError("bad config line '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto need = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end())
      throw VersionMismatchError(std::string("missing config key ") + key);
    return it->second;
  };

  ArtifactMeta meta;
  ModelConfig& c = meta.cfg;
  c.char_seq_len = static_cast<int>(to_int(need("char_seq_len"), "char_seq_len"));
  c.word_seq_len = static_cast<int>(to_int(need("word_seq_len"), "word_seq_len"));
  c.char_emb_dim = static_cast<int>(to_int(need("char_emb_dim"), "char_emb_dim"));
  c.word_emb_dim = static_cast<int>(to_int(need("word_emb_dim"), "word_emb_dim"));
  c.char_filters = static_cast<int>(to_int(need("char_filters"), "char_filters"));
  c.conv_widths.clear();
  for (const auto& w : split(need("conv_widths"), ';'))
    c.conv_widths.push_back(static_cast<int>(to_int(w, "conv_widths")));
  const std::string& wb = need("word_branch");
  if (wb == "attention") c.word_branch = WordBranch::kAttention;
  else if (wb == "conv") c.word_branch = WordBranch::kConv;
  else throw VersionMismatchError("bad word_branch '" + wb + "'");
  c.word_conv_filters = static_cast<int>(to_int(need("word_conv_filters"), "word_conv_filters"));
  c.lex_hidden1 = static_cast<int>(to_int(need("lex_hidden1"), "lex_hidden1"));
  c.lex_hidden2 = static_cast<int>(to_int(need("lex_hidden2"), "lex_hidden2"));
  c.dns_hidden1 = static_cast<int>(to_int(need("dns_hidden1"), "dns_hidden1"));
  c.dns_hidden2 = static_cast<int>(to_int(need("dns_hidden2"), "dns_hidden2"));
  c.fusion_dim = static_cast<int>(to_int(need("fusion_dim"), "fusion_dim"));
  c.word_vocab_size = static_cast<int>(to_int(need("word_vocab_size"), "word_vocab_size"));
  c.tld_vocab_k = static_cast<int>(to_int(need("tld_vocab_k"), "tld_vocab_k"));
  c.dns_top_k = static_cast<int>(to_int(need("dns_top_k"), "dns_top_k"));
  c.use_lexical = to_int(need("use_lexical"), "use_lexical") != 0;
  c.use_dns = to_int(need("use_dns"), "use_dns") != 0;
  const std::string& em = need("entropy_mode");
  if (em == "distinct") c.entropy_mode = lexical::EntropyMode::kDistinctBase;
  else if (em == "base2") c.entropy_mode = lexical::EntropyMode::kBase2;
  else throw VersionMismatchError("bad entropy_mode '" + em + "'");
  const std::string& lm = need("loss_mode");
  if (lm == "multiclass") c.loss_mode = LossMode::kMulticlass;
  else if (lm == "binary") c.loss_mode = LossMode::kBinary;
  else throw VersionMismatchError("bad loss_mode '" + lm + "'");
  auto cutoff = parse_iso8601(need("cutoff"));
  if (!cutoff) throw VersionMismatchError("bad cutoff timestamp");
  meta.cutoff = *cutoff;

  auto decode_list = [](const std::string& value) {
    std::vector<std::string> out;
    if (value.empty()) return out;
    for (const auto& item : split(value, ',')) out.push_back(decode_token(item));
    return out;
  };
  meta.word_vocab = WordVocab(decode_list(need("word_vocab")));
  meta.tld_vocab = lexical::TldVocab(decode_list(need("tld_vocab")));
  const std::string& asns = need("asn_vocab");
  if (!asns.empty())
    for (const auto& a : split(asns, ','))
      meta.dns_vocab.asns.push_back(static_cast<uint32_t>(to_int(a, "asn_vocab")));
  meta.dns_vocab.countries = decode_list(need("country_vocab"));
  meta.dns_vocab.isps = decode_list(need("isp_vocab"));
  return meta;
}

uint64_t fnv1a64(const uint8_t* data, size_t len) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (size_t i = 0; i < len; ++i) {
    h ^= data[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

namespace {

void put_u16(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}
void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

struct Reader {
  const uint8_t* data;
  size_t len;
  size_t pos = 0;

  void need(size_t n) const {
    if (pos + n > len) throw ChecksumMismatchError("model file is corrupt (short read)");
  }
  uint16_t u16() {
    need(2);
    uint16_t v = static_cast<uint16_t>(data[pos] | (data[pos + 1] << 8));
    pos += 2;
    return v;
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(data[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
  uint8_t u8() {
    need(1);
    return data[pos++];
  }
  std::string bytes(size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(data + pos), n);
    pos += n;
    return s;
  }
};

void append_tensor(std::string& out, const std::string& name, const Tensor<float>& t) {
  put_u16(out, static_cast<uint16_t>(name.size()));
  out += name;
  out.push_back(static_cast<char>(t.shape.size()));
  for (int d : t.shape) put_u32(out, static_cast<uint32_t>(d));
  size_t bytes = t.numel() * sizeof(float);
  size_t at = out.size();
  out.resize(at + bytes);
  std::memcpy(out.data() + at, t.data.data(), bytes);
}

Tensor<float> vec_to_tensor(const std::vector<float>& v) {
  Tensor<float> t({1, static_cast<int>(v.size())});
  std::copy(v.begin(), v.end(), t.data.begin());
  return t;
}

Tensor<float> flags_to_tensor(const std::vector<uint8_t>& v) {
  Tensor<float> t({1, static_cast<int>(v.size())});
  for (size_t i = 0; i < v.size(); ++i) t.data[i] = static_cast<float>(v[i]);
  return t;
}

}  // namespace

void save_model(const Model<float>& model, const std::string& path) {
  std::string out;
  out.append(kMagic, 4);
  put_u16(out, kVersion);

  ArtifactMeta meta{model.cfg, model.word_vocab, model.tld_vocab, model.dns_vocab, 0};
  std::string text = meta_to_text(meta);
  put_u32(out, static_cast<uint32_t>(text.size()));
  out += text;

  std::vector<std::pair<std::string, const Tensor<float>*>> tensors;
  model.params.for_each(
      [&](const char* name, const Tensor<float>& t) { tensors.emplace_back(name, &t); });

  Tensor<float> std_tensors[8] = {
      vec_to_tensor(model.std_lex.mean),    vec_to_tensor(model.std_lex.scale),
      flags_to_tensor(model.std_lex.active), flags_to_tensor(model.std_lex.log1p_first),
      vec_to_tensor(model.std_dns.mean),    vec_to_tensor(model.std_dns.scale),
      flags_to_tensor(model.std_dns.active), flags_to_tensor(model.std_dns.log1p_first)};
  const char* std_names[8] = {"std_lex.mean",  "std_lex.scale", "std_lex.active",
                              "std_lex.log1p", "std_dns.mean",  "std_dns.scale",
                              "std_dns.active", "std_dns.log1p"};
  for (int i = 0; i < 8; ++i) tensors.emplace_back(std_names[i], &std_tensors[i]);

  put_u32(out, static_cast<uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) append_tensor(out, name, *t);

  put_u64(out, fnv1a64(reinterpret_cast<const uint8_t*>(out.data()), out.size()));

  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write model file " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("failed writing model file " + path);
}

Model<float> load_model(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open model file " + path);
  std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  const uint8_t* data = reinterpret_cast<const uint8_t*>(buf.data());
  size_t len = buf.size();

  if (len < 6) throw ChecksumMismatchError("model file is truncated");
  if (std::memcmp(data, kMagic, 4) != 0)
    throw VersionMismatchError("not a model file (bad magic)");
  uint16_t version = static_cast<uint16_t>(data[4] | (data[5] << 8));
  if (version != kVersion)
    throw VersionMismatchError("unsupported model version " + std::to_string(version));
  if (len < 14) throw ChecksumMismatchError("model file is truncated");

  uint64_t stored = 0;
  for (int i = 0; i < 8; ++i)
    stored |= static_cast<uint64_t>(data[len - 8 + i]) << (8 * i);
  if (fnv1a64(data, len - 8) != stored)
    throw ChecksumMismatchError("model file checksum mismatch");

  Reader r{data, len - 8, 6};
  uint32_t text_len = r.u32();
  std::string text = r.bytes(text_len);
  ArtifactMeta meta = meta_from_text(text);

  Model<float> model;
  model.cfg = meta.cfg;
  model.word_vocab = meta.word_vocab;
  model.tld_vocab = meta.tld_vocab;
  model.dns_vocab = meta.dns_vocab;
  Rng rng(0);
  model.init(rng);  // allocates shapes; every tensor is overwritten below

  std::map<std::string, Tensor<float>*> by_name;
  model.params.for_each([&](const char* name, Tensor<float>& t) { by_name[name] = &t; });

  auto read_tensor = [&](Tensor<float>& dst, const std::string& name) {
    uint8_t ndim = r.u8();
    std::vector<int> shape(ndim);
    for (int i = 0; i < ndim; ++i) shape[i] = static_cast<int>(r.u32());
    Tensor<float> t(shape);
    size_t bytes = t.numel() * sizeof(float);
    r.need(bytes);
    std::memcpy(t.data.data(), r.data + r.pos, bytes);
    r.pos += bytes;
    if (!dst.shape.empty() && dst.shape != shape)
      throw ChecksumMismatchError("tensor shape mismatch for " + name);
    dst = std::move(t);
  };

  uint32_t n_tensors = r.u32();
  Tensor<float> scratch;
  for (uint32_t i = 0; i < n_tensors; ++i) {
    uint16_t name_len = r.u16();
    std::string name = r.bytes(name_len);
    auto to_vec = [](const Tensor<float>& t) {
      return std::vector<float>(t.data.begin(), t.data.end());
    };
    auto to_flags = [](const Tensor<float>& t) {
      std::vector<uint8_t> v(t.numel());
      for (size_t j = 0; j < v.size(); ++j) v[j] = t.data[j] != 0.0f ? 1 : 0;
      return v;
    };
    if (auto it = by_name.find(name); it != by_name.end()) {
      read_tensor(*it->second, name);
    } else if (name.rfind("std_", 0) == 0) {
      scratch = Tensor<float>();
      read_tensor(scratch, name);
      Standardizer& s = name.rfind("std_lex", 0) == 0 ? model.std_lex : model.std_dns;
      if (name.ends_with(".mean")) s.mean = to_vec(scratch);
      else if (name.ends_with(".scale")) s.scale = to_vec(scratch);
      else if (name.ends_with(".active")) s.active = to_flags(scratch);
      else if (name.ends_with(".log1p")) s.log1p_first = to_flags(scratch);
      else throw ChecksumMismatchError("unknown standardizer tensor " + name);
    } else {
      throw ChecksumMismatchError("unknown tensor " + name);
    }
  }
  return model;
}

}  // namespace urlbench::nn
