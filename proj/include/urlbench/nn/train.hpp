#pragma once

#include <atomic>
#include <cmath>
#include <string>
#include <thread>
#include <vector>

#include "urlbench/errors.hpp"
#include "urlbench/nn/model.hpp"

namespace urlbench::nn {

enum class Optimizer : uint8_t { kAdam, kMomentum };

struct TrainConfig {
  Optimizer optimizer = Optimizer::kAdam;
  double learning_rate = 1e-3;
  double momentum = 0.9;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int batch_size = 128;
  int epochs = 5;
  uint64_t seed = 1;
  double lambda = 1.0;  // weight of the type term in multiclass mode
  int threads = 1;      // data-parallel gradient workers
  int shard_size = 16;  // fixed shard width; reduction order is shard order
};

struct TrainSample {
  TokenizedUrl tok;
  std::vector<float> lex;
  std::vector<float> dns;
  Label label = Label::kBenign;
  Timestamp first_seen = 0;
};

struct EpochStats {
  int epoch = 0;
  double mean_loss = 0.0;
};

/// Fits the z-score statistics on the given (train-split) rows.
template <typename T>
void fit_standardizer(Model<T>& model, const std::vector<TrainSample>& data) {
  std::vector<const float*> lex_rows, dns_rows;
  lex_rows.reserve(data.size());
  dns_rows.reserve(data.size());
  for (const auto& s : data) {
    lex_rows.push_back(s.lex.data());
    dns_rows.push_back(s.dns.data());
  }
  model.std_lex.fit(lex_rows);
  model.std_dns.fit(dns_rows);
}

namespace detail {

template <typename T>
void add_into(Gradients<T>& acc, const Gradients<T>& s) {
  auto add = [](Tensor<T>& a, const Tensor<T>& b) {
    for (size_t i = 0; i < a.numel(); ++i) a.data[i] += b.data[i];
  };
  // keep in sync with ParamTensors::for_each field order
  add(acc.char_emb, s.char_emb);
  add(acc.word_emb, s.word_emb);
  for (size_t i = 0; i < acc.conv_w.size(); ++i) add(acc.conv_w[i], s.conv_w[i]);
  for (size_t i = 0; i < acc.conv_b.size(); ++i) add(acc.conv_b[i], s.conv_b[i]);
  add(acc.attn_q, s.attn_q);
  add(acc.attn_k, s.attn_k);
  add(acc.attn_v, s.attn_v);
  for (size_t i = 0; i < acc.wconv_w.size(); ++i) add(acc.wconv_w[i], s.wconv_w[i]);
  for (size_t i = 0; i < acc.wconv_b.size(); ++i) add(acc.wconv_b[i], s.wconv_b[i]);
  add(acc.lex_w1, s.lex_w1);
  add(acc.lex_b1, s.lex_b1);
  add(acc.lex_w2, s.lex_w2);
  add(acc.lex_b2, s.lex_b2);
  add(acc.dns_w1, s.dns_w1);
  add(acc.dns_b1, s.dns_b1);
  add(acc.dns_w2, s.dns_w2);
  add(acc.dns_b2, s.dns_b2);
  add(acc.fuse_w, s.fuse_w);
  add(acc.fuse_b, s.fuse_b);
  add(acc.head_mal_w, s.head_mal_w);
  add(acc.head_mal_b, s.head_mal_b);
  add(acc.head_type_w, s.head_type_w);
  add(acc.head_type_b, s.head_type_b);
}

template <typename T>
void zero_grads(Gradients<T>& g) {
  g.for_each([](const char*, Tensor<T>& t) { t.zero(); });
}

}  // namespace detail

template <typename T>
class AdamState {
 public:
  void step(Model<T>& model, Gradients<T>& grads, const TrainConfig& cfg) {
    if (m_.char_emb.numel() == 0) {
      zero_like(m_, model);
      zero_like(v_, model);
    }
    ++t_;
    T lr = static_cast<T>(cfg.learning_rate);
    T b1 = static_cast<T>(cfg.adam_beta1), b2 = static_cast<T>(cfg.adam_beta2);
    T eps = static_cast<T>(cfg.adam_eps);
    T bc1 = static_cast<T>(1.0 - std::pow(cfg.adam_beta1, t_));
    T bc2 = static_cast<T>(1.0 - std::pow(cfg.adam_beta2, t_));

    std::vector<Tensor<T>*> ms, vs;
    m_.for_each([&](const char*, Tensor<T>& t) { ms.push_back(&t); });
    v_.for_each([&](const char*, Tensor<T>& t) { vs.push_back(&t); });
    std::vector<Tensor<T>*> gs;
    grads.for_each([&](const char*, Tensor<T>& t) { gs.push_back(&t); });
    size_t idx = 0;
    model.params.for_each([&](const char*, Tensor<T>& w) {
      Tensor<T>& m = *ms[idx];
      Tensor<T>& v = *vs[idx];
      Tensor<T>& g = *gs[idx];
      for (size_t i = 0; i < w.numel(); ++i) {
        m.data[i] = b1 * m.data[i] + (T(1) - b1) * g.data[i];
        v.data[i] = b2 * v.data[i] + (T(1) - b2) * g.data[i] * g.data[i];
        T mh = m.data[i] / bc1;
        T vh = v.data[i] / bc2;
        w.data[i] -= lr * mh / (std::sqrt(vh) + eps);
      }
      ++idx;
    });
  }

 private:
  Gradients<T> m_, v_;
  int64_t t_ = 0;
};

template <typename T>
class MomentumState {
 public:
  void step(Model<T>& model, Gradients<T>& grads, const TrainConfig& cfg) {
    if (v_.char_emb.numel() == 0) zero_like(v_, model);
    T lr = static_cast<T>(cfg.learning_rate);
    T mu = static_cast<T>(cfg.momentum);
    std::vector<Tensor<T>*> vs, gs;
    v_.for_each([&](const char*, Tensor<T>& t) { vs.push_back(&t); });
    grads.for_each([&](const char*, Tensor<T>& t) { gs.push_back(&t); });
    size_t idx = 0;
    model.params.for_each([&](const char*, Tensor<T>& w) {
      Tensor<T>& v = *vs[idx];
      Tensor<T>& g = *gs[idx];
      for (size_t i = 0; i < w.numel(); ++i) {
        v.data[i] = mu * v.data[i] - lr * g.data[i];
        w.data[i] += v.data[i];
      }
      ++idx;
    });
  }

 private:
  Gradients<T> v_;
};

/// Mini-batch training. A fixed seed pins initialization (done by the
/// caller), shuffle order and therefore the whole trajectory; gradients of a
/// batch are summed shard-by-shard in index order, so runs are reproducible
/// for any thread count. Throws DivergenceError on a non-finite loss.
template <typename T>
std::vector<EpochStats> train(Model<T>& model, const std::vector<TrainSample>& data,
                              const TrainConfig& cfg) {
  if (cfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (cfg.shard_size < 1) throw ConfigError("shard_size must be >= 1");
  std::vector<EpochStats> stats;
  if (cfg.epochs <= 0 || data.empty()) return stats;

  Rng rng(cfg.seed ^ 0x5eedbeefcafef00dull);
  std::vector<size_t> order(data.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  int n_shards_max = (cfg.batch_size + cfg.shard_size - 1) / cfg.shard_size;
  std::vector<Gradients<T>> shard_grads(n_shards_max);
  for (auto& g : shard_grads) zero_like(g, model);
  Gradients<T> total;
  zero_like(total, model);

  AdamState<T> adam;
  MomentumState<T> momentum;
  LossMode mode = model.cfg.loss_mode;
  int workers = std::max(1, cfg.threads);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    double loss_sum = 0.0;
    size_t seen = 0;

    for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
      size_t batch_n = std::min<size_t>(cfg.batch_size, order.size() - start);
      int n_mal = 0;
      for (size_t i = 0; i < batch_n; ++i)
        if (data[order[start + i]].label != Label::kBenign) ++n_mal;

      int n_shards =
          static_cast<int>((batch_n + cfg.shard_size - 1) / cfg.shard_size);
      std::vector<double> shard_mal_loss(n_shards, 0.0), shard_type_loss(n_shards, 0.0);

      auto run_shard = [&](int shard) {
        Gradients<T>& g = shard_grads[shard];
        detail::zero_grads(g);
        size_t lo = start + static_cast<size_t>(shard) * cfg.shard_size;
        size_t hi = std::min(lo + cfg.shard_size, start + batch_n);
        for (size_t i = lo; i < hi; ++i) {
          const TrainSample& s = data[order[i]];
          Tape<T> tape;
          auto logits = forward_sample<T>(tape, model, &g, s.tok, s.lex, s.dns);
          double a = logits.mal();
          double is_mal = s.label == Label::kBenign ? 0.0 : 1.0;
          shard_mal_loss[shard] += bce_with_logits(a, is_mal);
          double seed_a = (sigmoid(a) - is_mal) / static_cast<double>(batch_n);
          tape.seed(logits.malicious, static_cast<T>(seed_a));
          if (mode == LossMode::kMulticlass && is_mal == 1.0) {
            double b = logits.type();
            double is_phish = s.label == Label::kPhishing ? 1.0 : 0.0;
            shard_type_loss[shard] += bce_with_logits(b, is_phish);
            double seed_b = cfg.lambda * (sigmoid(b) - is_phish) / n_mal;
            tape.seed(logits.phishing_given_mal, static_cast<T>(seed_b));
          }
          tape.backward();
        }
      };

      if (workers <= 1 || n_shards <= 1) {
        for (int s = 0; s < n_shards; ++s) run_shard(s);
      } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        int spawn = std::min(workers, n_shards);
        pool.reserve(spawn);
        for (int w = 0; w < spawn; ++w) {
          pool.emplace_back([&] {
            for (;;) {
              int s = next.fetch_add(1);
              if (s >= n_shards) return;
              run_shard(s);
            }
          });
        }
        for (auto& t : pool) t.join();
      }

      detail::zero_grads(total);
      for (int s = 0; s < n_shards; ++s) detail::add_into(total, shard_grads[s]);

      double mal_term = 0.0, type_term = 0.0;
      for (int s = 0; s < n_shards; ++s) {
        mal_term += shard_mal_loss[s];
        type_term += shard_type_loss[s];
      }
      mal_term /= static_cast<double>(batch_n);
      double batch_loss = mal_term;
      if (mode == LossMode::kMulticlass && n_mal > 0)
        batch_loss += cfg.lambda * type_term / n_mal;
      if (!std::isfinite(batch_loss))
        throw DivergenceError("non-finite loss in epoch " + std::to_string(epoch + 1) +
                              " at sample offset " + std::to_string(start));
      loss_sum += batch_loss * static_cast<double>(batch_n);
      seen += batch_n;

      if (cfg.optimizer == Optimizer::kAdam) adam.step(model, total, cfg);
      else momentum.step(model, total, cfg);
    }
    stats.push_back(EpochStats{epoch + 1, loss_sum / static_cast<double>(seen)});
  }
  return stats;
}

}  // namespace urlbench::nn
