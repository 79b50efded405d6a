#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "urlbench/dns.hpp"
#include "urlbench/errors.hpp"
#include "urlbench/lexical.hpp"
#include "urlbench/nn/autodiff.hpp"
#include "urlbench/nn/tensor.hpp"
#include "urlbench/nn/vocab.hpp"

namespace urlbench::nn {

enum class WordBranch : uint8_t { kAttention, kConv };
enum class LossMode : uint8_t { kBinary, kMulticlass };

struct ModelConfig {
  int char_seq_len = 200;  // L
  int word_seq_len = 32;   // M
  int char_emb_dim = 32;
  int word_emb_dim = 32;
  int char_filters = 64;  // per kernel width
  std::vector<int> conv_widths = {3, 4, 5, 6};
  WordBranch word_branch = WordBranch::kAttention;
  int word_conv_filters = 16;  // per width, conv word-branch variant
  int lex_hidden1 = 64;
  int lex_hidden2 = 32;
  int dns_hidden1 = 64;
  int dns_hidden2 = 32;
  int fusion_dim = 128;
  int word_vocab_size = 10000;  // top words, PAD/UNK excluded
  int tld_vocab_k = 32;
  int dns_top_k = 30;
  bool use_lexical = true;
  bool use_dns = true;
  lexical::EntropyMode entropy_mode = lexical::EntropyMode::kDistinctBase;
  LossMode loss_mode = LossMode::kMulticlass;

  int word_vec_dim() const { return word_emb_dim + char_emb_dim; }
};

/// Per-dimension input transform: optional log1p then z-score, fitted on the
/// train split. Inactive dimensions (flags, one-hots, entropies) pass
/// through.
struct Standardizer {
  std::vector<float> mean;
  std::vector<float> scale;
  std::vector<uint8_t> active;
  std::vector<uint8_t> log1p_first;

  int dim() const { return static_cast<int>(mean.size()); }

  void init_identity(int d) {
    mean.assign(d, 0.0f);
    scale.assign(d, 1.0f);
    active.assign(d, 0);
    log1p_first.assign(d, 0);
  }

  /// Fits mean/std over rows for the marked dimensions.
  /// rows: feature vectors, all of width dim().
  void fit(const std::vector<const float*>& rows) {
    int d = dim();
    std::vector<double> sum(d, 0.0), sumsq(d, 0.0);
    for (const float* row : rows) {
      for (int j = 0; j < d; ++j) {
        if (!active[j]) continue;
        double v = log1p_first[j] ? std::log1p(static_cast<double>(row[j]))
                                  : static_cast<double>(row[j]);
        sum[j] += v;
        sumsq[j] += v * v;
      }
    }
    double n = static_cast<double>(rows.size());
    for (int j = 0; j < d; ++j) {
      if (!active[j] || n == 0.0) continue;
      double m = sum[j] / n;
      double var = sumsq[j] / n - m * m;
      double sd = var > 0.0 ? std::sqrt(var) : 0.0;
      mean[j] = static_cast<float>(m);
      scale[j] = sd > 0.0 ? static_cast<float>(sd) : 1.0f;
    }
  }

  template <typename T>
  Tensor<T> apply(const std::vector<float>& raw) const {
    Tensor<T> out({1, dim()});
    for (int j = 0; j < dim(); ++j) {
      double v = raw[j];
      if (active[j]) {
        if (log1p_first[j]) v = std::log1p(v);
        v = (v - mean[j]) / scale[j];
      }
      out.data[j] = static_cast<T>(v);
    }
    return out;
  }
};

/// Parameter block; the field order here is the canonical enumeration order
/// for optimizers, gradient buffers and the model file.
template <typename T>
struct ParamTensors {
  Tensor<T> char_emb, word_emb;
  std::vector<Tensor<T>> conv_w, conv_b;    // char branch, one per width
  Tensor<T> attn_q, attn_k, attn_v;         // attention word branch
  std::vector<Tensor<T>> wconv_w, wconv_b;  // conv word branch
  Tensor<T> lex_w1, lex_b1, lex_w2, lex_b2;
  Tensor<T> dns_w1, dns_b1, dns_w2, dns_b2;
  Tensor<T> fuse_w, fuse_b;
  Tensor<T> head_mal_w, head_mal_b, head_type_w, head_type_b;

  template <typename F>
  void for_each(F&& fn) {
    fn("char_emb", char_emb);
    fn("word_emb", word_emb);
    for (size_t i = 0; i < conv_w.size(); ++i) {
      fn(("conv_w." + std::to_string(i)).c_str(), conv_w[i]);
      fn(("conv_b." + std::to_string(i)).c_str(), conv_b[i]);
    }
    fn("attn_q", attn_q);
    fn("attn_k", attn_k);
    fn("attn_v", attn_v);
    for (size_t i = 0; i < wconv_w.size(); ++i) {
      fn(("wconv_w." + std::to_string(i)).c_str(), wconv_w[i]);
      fn(("wconv_b." + std::to_string(i)).c_str(), wconv_b[i]);
    }
    fn("lex_w1", lex_w1);
    fn("lex_b1", lex_b1);
    fn("lex_w2", lex_w2);
    fn("lex_b2", lex_b2);
    fn("dns_w1", dns_w1);
    fn("dns_b1", dns_b1);
    fn("dns_w2", dns_w2);
    fn("dns_b2", dns_b2);
    fn("fuse_w", fuse_w);
    fn("fuse_b", fuse_b);
    fn("head_mal_w", head_mal_w);
    fn("head_mal_b", head_mal_b);
    fn("head_type_w", head_type_w);
    fn("head_type_b", head_type_b);
  }

  template <typename F>
  void for_each(F&& fn) const {
    const_cast<ParamTensors*>(this)->for_each(
        [&](const char* name, Tensor<T>& t) { fn(name, static_cast<const Tensor<T>&>(t)); });
  }
};

template <typename T>
struct Model {
  ModelConfig cfg;
  WordVocab word_vocab;
  lexical::TldVocab tld_vocab;
  dns::DnsVocab dns_vocab;
  Standardizer std_lex, std_dns;
  ParamTensors<T> params;

  int lex_dim() const { return lexical::LexicalLayout(tld_vocab.size()).dim(); }
  int dns_dim() const { return dns_vocab.dim(); }

  int char_branch_dim() const {
    return cfg.char_filters * static_cast<int>(cfg.conv_widths.size());
  }
  int word_branch_dim() const {
    return cfg.word_branch == WordBranch::kAttention
               ? cfg.word_vec_dim()
               : cfg.word_conv_filters * static_cast<int>(cfg.conv_widths.size());
  }
  int fusion_in_dim() const {
    int d = char_branch_dim() + word_branch_dim();
    if (cfg.use_lexical) d += cfg.lex_hidden2;
    if (cfg.use_dns) d += cfg.dns_hidden2;
    return d;
  }

  /// Allocates and fills every parameter. Embeddings start U(-0.1, 0.1);
  /// weight matrices U(+-sqrt(1/fan_in)); biases zero. The draw order is
  /// fixed by the for_each enumeration, so a seed pins every weight.
  void init(Rng& rng) {
    auto matrix = [&](Tensor<T>& t, int rows, int cols, double limit) {
      t = Tensor<T>({rows, cols});
      for (auto& v : t.data) v = static_cast<T>(rng.uniform(-limit, limit));
    };
    auto fan_in = [&](Tensor<T>& t, int rows, int cols) {
      matrix(t, rows, cols, std::sqrt(1.0 / rows));
    };
    auto bias = [&](Tensor<T>& t, int n) { t = Tensor<T>({1, n}); };

    matrix(params.char_emb, CharVocab::size(), cfg.char_emb_dim, 0.1);
    matrix(params.word_emb, word_vocab.size(), cfg.word_emb_dim, 0.1);

    int n_widths = static_cast<int>(cfg.conv_widths.size());
    params.conv_w.resize(n_widths);
    params.conv_b.resize(n_widths);
    for (int i = 0; i < n_widths; ++i) {
      int k = cfg.conv_widths[i] * cfg.char_emb_dim;
      fan_in(params.conv_w[i], k, cfg.char_filters);
      bias(params.conv_b[i], cfg.char_filters);
    }

    int wd = cfg.word_vec_dim();
    fan_in(params.attn_q, wd, wd);
    fan_in(params.attn_k, wd, wd);
    fan_in(params.attn_v, wd, wd);

    params.wconv_w.resize(n_widths);
    params.wconv_b.resize(n_widths);
    for (int i = 0; i < n_widths; ++i) {
      int k = cfg.conv_widths[i] * wd;
      fan_in(params.wconv_w[i], k, cfg.word_conv_filters);
      bias(params.wconv_b[i], cfg.word_conv_filters);
    }

    fan_in(params.lex_w1, lex_dim(), cfg.lex_hidden1);
    bias(params.lex_b1, cfg.lex_hidden1);
    fan_in(params.lex_w2, cfg.lex_hidden1, cfg.lex_hidden2);
    bias(params.lex_b2, cfg.lex_hidden2);

    fan_in(params.dns_w1, dns_dim(), cfg.dns_hidden1);
    bias(params.dns_b1, cfg.dns_hidden1);
    fan_in(params.dns_w2, cfg.dns_hidden1, cfg.dns_hidden2);
    bias(params.dns_b2, cfg.dns_hidden2);

    fan_in(params.fuse_w, fusion_in_dim(), cfg.fusion_dim);
    bias(params.fuse_b, cfg.fusion_dim);

    fan_in(params.head_mal_w, cfg.fusion_dim, 1);
    bias(params.head_mal_b, 1);
    fan_in(params.head_type_w, cfg.fusion_dim, 1);
    bias(params.head_type_b, 1);

    std_lex.init_identity(lex_dim());
    std_dns.init_identity(dns_dim());
    mark_standardized_dims();
  }

  /// Marks which input dimensions get z-scored: lexical counts, ip_count and
  /// TTL (the latter log-scaled first).
  void mark_standardized_dims() {
    lexical::LexicalLayout layout(tld_vocab.size());
    for (int idx : layout.count_indices()) std_lex.active[idx] = 1;
    std_dns.active[dns_vocab.ip_count_index()] = 1;
    std_dns.active[dns_vocab.ttl_index()] = 1;
    std_dns.log1p_first[dns_vocab.ttl_index()] = 1;
  }
};

template <typename T>
using Gradients = ParamTensors<T>;

/// Allocates a zeroed gradient block mirroring the model's parameter shapes.
template <typename T>
void zero_like(Gradients<T>& grads, const Model<T>& model) {
  grads = Gradients<T>();
  auto clone = [](const Tensor<T>& t) { return Tensor<T>(t.shape); };
  grads.char_emb = clone(model.params.char_emb);
  grads.word_emb = clone(model.params.word_emb);
  grads.conv_w.clear();
  grads.conv_b.clear();
  for (auto& t : model.params.conv_w) grads.conv_w.push_back(clone(t));
  for (auto& t : model.params.conv_b) grads.conv_b.push_back(clone(t));
  grads.attn_q = clone(model.params.attn_q);
  grads.attn_k = clone(model.params.attn_k);
  grads.attn_v = clone(model.params.attn_v);
  grads.wconv_w.clear();
  grads.wconv_b.clear();
  for (auto& t : model.params.wconv_w) grads.wconv_w.push_back(clone(t));
  for (auto& t : model.params.wconv_b) grads.wconv_b.push_back(clone(t));
  grads.lex_w1 = clone(model.params.lex_w1);
  grads.lex_b1 = clone(model.params.lex_b1);
  grads.lex_w2 = clone(model.params.lex_w2);
  grads.lex_b2 = clone(model.params.lex_b2);
  grads.dns_w1 = clone(model.params.dns_w1);
  grads.dns_b1 = clone(model.params.dns_b1);
  grads.dns_w2 = clone(model.params.dns_w2);
  grads.dns_b2 = clone(model.params.dns_b2);
  grads.fuse_w = clone(model.params.fuse_w);
  grads.fuse_b = clone(model.params.fuse_b);
  grads.head_mal_w = clone(model.params.head_mal_w);
  grads.head_mal_b = clone(model.params.head_mal_b);
  grads.head_type_w = clone(model.params.head_type_w);
  grads.head_type_b = clone(model.params.head_type_b);
}

template <typename T>
struct SampleLogits {
  typename Tape<T>::NodeP malicious;     // logit, head A
  typename Tape<T>::NodeP phishing_given_mal;  // logit, head B

  double mal() const { return static_cast<double>(malicious->v().data[0]); }
  double type() const { return static_cast<double>(phishing_given_mal->v().data[0]); }
};

/// Builds the full per-sample graph. grads == nullptr runs inference mode
/// (no closures recorded). Standardization of the raw lexical/DNS vectors
/// happens here so every caller sees the same inputs.
template <typename T>
SampleLogits<T> forward_sample(Tape<T>& tape, const Model<T>& model, Gradients<T>* grads,
                               const TokenizedUrl& tok, const std::vector<float>& lex_raw,
                               const std::vector<float>& dns_raw) {
  const ModelConfig& cfg = model.cfg;
  auto P = [&](const Tensor<T>& value, Tensor<T>* grad) {
    return tape.param(value, grads ? grad : nullptr);
  };
  const ParamTensors<T>& mp = model.params;

  // Character branch: embeddings, one conv bank per width, global max pool.
  auto char_table = P(mp.char_emb, grads ? &grads->char_emb : nullptr);
  auto ce = tape.embedding_rows(char_table, tok.char_ids);
  typename Tape<T>::NodeP char_branch = nullptr;
  for (size_t i = 0; i < cfg.conv_widths.size(); ++i) {
    auto cw = P(mp.conv_w[i], grads ? &grads->conv_w[i] : nullptr);
    auto cb = P(mp.conv_b[i], grads ? &grads->conv_b[i] : nullptr);
    auto conv = tape.conv1d_valid(ce, cw, cb, cfg.conv_widths[i]);
    auto pooled = tape.max_over_rows(tape.relu(conv));
    char_branch = char_branch ? tape.concat_cols(char_branch, pooled) : pooled;
  }

  // Word branch: embeddings enriched with mean character embeddings.
  auto word_table = P(mp.word_emb, grads ? &grads->word_emb : nullptr);
  auto we = tape.embedding_rows(word_table, tok.word_ids);
  auto cm = tape.span_mean_rows(char_table, tok.spans);
  auto wv = tape.concat_cols(we, cm);
  int n_valid = std::max(1, tok.n_words);

  typename Tape<T>::NodeP word_branch = nullptr;
  if (cfg.word_branch == WordBranch::kAttention) {
    auto q = tape.matmul(wv, P(mp.attn_q, grads ? &grads->attn_q : nullptr));
    auto k = tape.matmul(wv, P(mp.attn_k, grads ? &grads->attn_k : nullptr));
    auto v = tape.matmul(wv, P(mp.attn_v, grads ? &grads->attn_v : nullptr));
    auto scores = tape.scale(tape.matmul_nt(q, k),
                             static_cast<T>(1.0 / std::sqrt(double(cfg.word_vec_dim()))));
    auto attn = tape.row_softmax_masked(scores, n_valid);
    auto ctx = tape.matmul(attn, v);
    auto h = tape.add(wv, ctx);  // residual
    word_branch = tape.mean_rows_masked(h, n_valid);
  } else {
    for (size_t i = 0; i < cfg.conv_widths.size(); ++i) {
      auto cw = P(mp.wconv_w[i], grads ? &grads->wconv_w[i] : nullptr);
      auto cb = P(mp.wconv_b[i], grads ? &grads->wconv_b[i] : nullptr);
      auto conv = tape.conv1d_valid(wv, cw, cb, cfg.conv_widths[i]);
      auto pooled = tape.max_over_rows(tape.relu(conv));
      word_branch = word_branch ? tape.concat_cols(word_branch, pooled) : pooled;
    }
  }

  auto fused = tape.concat_cols(char_branch, word_branch);

  if (cfg.use_lexical) {
    auto lex_in = tape.input(model.std_lex.template apply<T>(lex_raw));
    auto l1 = tape.relu(tape.dense(lex_in, P(mp.lex_w1, grads ? &grads->lex_w1 : nullptr),
                                   P(mp.lex_b1, grads ? &grads->lex_b1 : nullptr)));
    auto l2 = tape.relu(tape.dense(l1, P(mp.lex_w2, grads ? &grads->lex_w2 : nullptr),
                                   P(mp.lex_b2, grads ? &grads->lex_b2 : nullptr)));
    fused = tape.concat_cols(fused, l2);
  }
  if (cfg.use_dns) {
    auto dns_in = tape.input(model.std_dns.template apply<T>(dns_raw));
    auto d1 = tape.relu(tape.dense(dns_in, P(mp.dns_w1, grads ? &grads->dns_w1 : nullptr),
                                   P(mp.dns_b1, grads ? &grads->dns_b1 : nullptr)));
    auto d2 = tape.relu(tape.dense(d1, P(mp.dns_w2, grads ? &grads->dns_w2 : nullptr),
                                   P(mp.dns_b2, grads ? &grads->dns_b2 : nullptr)));
    fused = tape.concat_cols(fused, d2);
  }

  auto hidden = tape.relu(tape.dense(fused, P(mp.fuse_w, grads ? &grads->fuse_w : nullptr),
                                     P(mp.fuse_b, grads ? &grads->fuse_b : nullptr)));
  SampleLogits<T> out;
  out.malicious = tape.dense(hidden, P(mp.head_mal_w, grads ? &grads->head_mal_w : nullptr),
                             P(mp.head_mal_b, grads ? &grads->head_mal_b : nullptr));
  out.phishing_given_mal =
      tape.dense(hidden, P(mp.head_type_w, grads ? &grads->head_type_w : nullptr),
                 P(mp.head_type_b, grads ? &grads->head_type_b : nullptr));
  return out;
}

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

/// Numerically stable binary cross-entropy on a logit.
inline double bce_with_logits(double logit, double target) {
  return std::max(logit, 0.0) - logit * target + std::log1p(std::exp(-std::abs(logit)));
}

struct LossParts {
  double total = 0.0;
  double malicious_term = 0.0;
  double type_term = 0.0;  // zero in binary mode or with no malicious rows
  int n_malicious = 0;
};

/// Batch loss from per-sample logits. In multiclass mode the type term is
/// averaged over malicious rows only; with none it vanishes and the loss
/// equals the binary one exactly.
inline LossParts compute_loss(const std::vector<double>& mal_logits,
                              const std::vector<double>& type_logits,
                              const std::vector<Label>& labels, LossMode mode, double lambda) {
  if (labels.empty()) throw EmptyCorpusError("loss over an empty batch");
  LossParts parts;
  double mal_sum = 0.0, type_sum = 0.0;
  for (size_t i = 0; i < labels.size(); ++i) {
    double is_mal = labels[i] == Label::kBenign ? 0.0 : 1.0;
    mal_sum += bce_with_logits(mal_logits[i], is_mal);
    if (mode == LossMode::kMulticlass && is_mal == 1.0) {
      double is_phish = labels[i] == Label::kPhishing ? 1.0 : 0.0;
      type_sum += bce_with_logits(type_logits[i], is_phish);
      ++parts.n_malicious;
    }
  }
  parts.malicious_term = mal_sum / static_cast<double>(labels.size());
  parts.type_term = parts.n_malicious > 0 ? type_sum / parts.n_malicious : 0.0;
  parts.total = parts.malicious_term + lambda * parts.type_term;
  return parts;
}

struct Prediction {
  double p_malicious = 0.0;
  double p_benign = 0.0;
  double p_phishing = 0.0;
  double p_malware = 0.0;
};

inline Prediction predict_from_logits(double mal_logit, double type_logit) {
  Prediction p;
  p.p_malicious = sigmoid(mal_logit);
  double p_type = sigmoid(type_logit);
  p.p_benign = 1.0 - p.p_malicious;
  p.p_phishing = p.p_malicious * p_type;
  p.p_malware = p.p_malicious * (1.0 - p_type);
  return p;
}

/// Inference-mode forward: (malicious logit, type logit).
template <typename T>
std::pair<double, double> infer_logits(const Model<T>& model, const TokenizedUrl& tok,
                                       const std::vector<float>& lex_raw,
                                       const std::vector<float>& dns_raw) {
  Tape<T> tape;
  auto logits = forward_sample<T>(tape, model, nullptr, tok, lex_raw, dns_raw);
  return {logits.mal(), logits.type()};
}

template <typename T>
Prediction predict(const Model<T>& model, const TokenizedUrl& tok,
                   const std::vector<float>& lex_raw, const std::vector<float>& dns_raw) {
  auto [a, b] = infer_logits(model, tok, lex_raw, dns_raw);
  return predict_from_logits(a, b);
}

}  // namespace urlbench::nn
