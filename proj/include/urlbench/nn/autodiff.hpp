#pragma once

#include <cmath>
#include <deque>
#include <functional>
#include <vector>

#include "urlbench/nn/tensor.hpp"

namespace urlbench::nn {

/// Reverse-mode tape over Tensor<T>. Nodes either own their value (op
/// outputs, inputs) or alias external storage (model parameters, whose grad
/// tensor is supplied by the caller so shard-local accumulation works).
/// Backward closures run in reverse recording order and add into grads.
template <typename T>
class Tape {
 public:
  struct Node {
    Tensor<T> owned_value;
    Tensor<T> owned_grad;
    Tensor<T>* value = nullptr;
    Tensor<T>* grad = nullptr;  // null when the node is untracked

    bool tracked() const { return grad != nullptr; }
    const Tensor<T>& v() const { return *value; }
    Tensor<T>& g() { return *grad; }
  };
  using NodeP = Node*;

  /// Untracked owned leaf (sample inputs, constants).
  NodeP input(Tensor<T> v) {
    Node& n = nodes_.emplace_back();
    n.owned_value = std::move(v);
    n.value = &n.owned_value;
    return &n;
  }

  /// Parameter leaf. Pass grad=nullptr for inference-mode forward passes.
  NodeP param(const Tensor<T>& value, Tensor<T>* grad) {
    Node& n = nodes_.emplace_back();
    n.value = const_cast<Tensor<T>*>(&value);
    n.grad = grad;
    return &n;
  }

  void seed(NodeP node, T g) {
    if (node->tracked()) node->g().data[0] += g;
  }

  void backward() {
    for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) (*it)();
  }

  // ----- ops -----

  /// table [V, D], ids -> [n, D]
  NodeP embedding_rows(NodeP table, std::vector<int> ids) {
    int d = table->v().cols();
    NodeP out = alloc({static_cast<int>(ids.size()), d}, table->tracked());
    for (size_t i = 0; i < ids.size(); ++i) {
      const T* src = table->v().row(ids[i]);
      T* dst = out->value->row(static_cast<int>(i));
      for (int j = 0; j < d; ++j) dst[j] = src[j];
    }
    if (out->tracked()) {
      steps_.push_back([table, out, ids = std::move(ids), d] {
        for (size_t i = 0; i < ids.size(); ++i) {
          const T* go = out->grad->row(static_cast<int>(i));
          T* gt = table->g().row(ids[i]);
          for (int j = 0; j < d; ++j) gt[j] += go[j];
        }
      });
    }
    return out;
  }

  /// Mean of table rows per span; empty spans yield zero rows. -> [spans, D]
  NodeP span_mean_rows(NodeP table, std::vector<std::vector<int>> spans) {
    int d = table->v().cols();
    NodeP out = alloc({static_cast<int>(spans.size()), d}, table->tracked());
    for (size_t s = 0; s < spans.size(); ++s) {
      if (spans[s].empty()) continue;
      T inv = T(1) / static_cast<T>(spans[s].size());
      T* dst = out->value->row(static_cast<int>(s));
      for (int id : spans[s]) {
        const T* src = table->v().row(id);
        for (int j = 0; j < d; ++j) dst[j] += src[j];
      }
      for (int j = 0; j < d; ++j) dst[j] *= inv;
    }
    if (out->tracked()) {
      steps_.push_back([table, out, spans = std::move(spans), d] {
        for (size_t s = 0; s < spans.size(); ++s) {
          if (spans[s].empty()) continue;
          T inv = T(1) / static_cast<T>(spans[s].size());
          const T* go = out->grad->row(static_cast<int>(s));
          for (int id : spans[s]) {
            T* gt = table->g().row(id);
            for (int j = 0; j < d; ++j) gt[j] += inv * go[j];
          }
        }
      });
    }
    return out;
  }

  /// [N, Da] ++ [N, Db] -> [N, Da+Db]
  NodeP concat_cols(NodeP a, NodeP b) {
    int n = a->v().rows(), da = a->v().cols(), db = b->v().cols();
    NodeP out = alloc({n, da + db}, a->tracked() || b->tracked());
    for (int r = 0; r < n; ++r) {
      T* dst = out->value->row(r);
      const T* pa = a->v().row(r);
      const T* pb = b->v().row(r);
      for (int j = 0; j < da; ++j) dst[j] = pa[j];
      for (int j = 0; j < db; ++j) dst[da + j] = pb[j];
    }
    if (out->tracked()) {
      steps_.push_back([a, b, out, n, da, db] {
        for (int r = 0; r < n; ++r) {
          const T* go = out->grad->row(r);
          if (a->tracked()) {
            T* ga = a->g().row(r);
            for (int j = 0; j < da; ++j) ga[j] += go[j];
          }
          if (b->tracked()) {
            T* gb = b->g().row(r);
            for (int j = 0; j < db; ++j) gb[j] += go[da + j];
          }
        }
      });
    }
    return out;
  }

  /// x [L, D], w [width*D, F], b [F] -> [L-width+1, F], valid positions only.
  NodeP conv1d_valid(NodeP x, NodeP w, NodeP b, int width) {
    int l = x->v().rows(), d = x->v().cols(), f = w->v().cols();
    int lo = l - width + 1;
    NodeP out = alloc({lo, f}, x->tracked() || w->tracked() || b->tracked());
    for (int t = 0; t < lo; ++t) {
      T* dst = out->value->row(t);
      const T* bias = b->v().data.data();
      for (int j = 0; j < f; ++j) dst[j] = bias[j];
      for (int k = 0; k < width; ++k) {
        const T* xr = x->v().row(t + k);
        for (int c = 0; c < d; ++c) {
          T xv = xr[c];
          if (xv == T(0)) continue;
          const T* wr = w->v().row(k * d + c);
          for (int j = 0; j < f; ++j) dst[j] += xv * wr[j];
        }
      }
    }
    if (out->tracked()) {
      steps_.push_back([x, w, b, out, lo, d, f, width] {
        for (int t = 0; t < lo; ++t) {
          const T* go = out->grad->row(t);
          if (b->tracked()) {
            T* gb = b->g().data.data();
            for (int j = 0; j < f; ++j) gb[j] += go[j];
          }
          for (int k = 0; k < width; ++k) {
            const T* xr = x->v().row(t + k);
            if (w->tracked()) {
              for (int c = 0; c < d; ++c) {
                T xv = xr[c];
                if (xv == T(0)) continue;
                T* gw = w->g().row(k * d + c);
                for (int j = 0; j < f; ++j) gw[j] += xv * go[j];
              }
            }
            if (x->tracked()) {
              T* gx = x->g().row(t + k);
              for (int c = 0; c < d; ++c) {
                const T* wr = w->v().row(k * d + c);
                T acc = T(0);
                for (int j = 0; j < f; ++j) acc += wr[j] * go[j];
                gx[c] += acc;
              }
            }
          }
        }
      });
    }
    return out;
  }

  /// Column-wise max over rows -> [1, C].
  NodeP max_over_rows(NodeP x) {
    int r = x->v().rows(), c = x->v().cols();
    NodeP out = alloc({1, c}, x->tracked());
    std::vector<int> arg(c, 0);
    for (int j = 0; j < c; ++j) {
      T best = x->v().row(0)[j];
      int bi = 0;
      for (int i = 1; i < r; ++i) {
        T v = x->v().row(i)[j];
        if (v > best) {
          best = v;
          bi = i;
        }
      }
      out->value->data[j] = best;
      arg[j] = bi;
    }
    if (out->tracked()) {
      steps_.push_back([x, out, arg = std::move(arg), c] {
        for (int j = 0; j < c; ++j) x->g().row(arg[j])[j] += out->grad->data[j];
      });
    }
    return out;
  }

  /// x [N, I] * w [I, O] + b -> [N, O]
  NodeP dense(NodeP x, NodeP w, NodeP b) {
    int n = x->v().rows(), i_dim = x->v().cols(), o = w->v().cols();
    NodeP out = alloc({n, o}, x->tracked() || w->tracked() || b->tracked());
    for (int r = 0; r < n; ++r) {
      T* dst = out->value->row(r);
      const T* bias = b->v().data.data();
      for (int j = 0; j < o; ++j) dst[j] = bias[j];
      const T* xr = x->v().row(r);
      for (int i = 0; i < i_dim; ++i) {
        T xv = xr[i];
        if (xv == T(0)) continue;
        const T* wr = w->v().row(i);
        for (int j = 0; j < o; ++j) dst[j] += xv * wr[j];
      }
    }
    if (out->tracked()) {
      steps_.push_back([x, w, b, out, n, i_dim, o] {
        for (int r = 0; r < n; ++r) {
          const T* go = out->grad->row(r);
          if (b->tracked()) {
            T* gb = b->g().data.data();
            for (int j = 0; j < o; ++j) gb[j] += go[j];
          }
          const T* xr = x->v().row(r);
          if (w->tracked()) {
            for (int i = 0; i < i_dim; ++i) {
              T xv = xr[i];
              if (xv == T(0)) continue;
              T* gw = w->g().row(i);
              for (int j = 0; j < o; ++j) gw[j] += xv * go[j];
            }
          }
          if (x->tracked()) {
            T* gx = x->g().row(r);
            for (int i = 0; i < i_dim; ++i) {
              const T* wr = w->v().row(i);
              T acc = T(0);
              for (int j = 0; j < o; ++j) acc += wr[j] * go[j];
              gx[i] += acc;
            }
          }
        }
      });
    }
    return out;
  }

  /// a [N, K] * b^T, b [M, K] -> [N, M]
  NodeP matmul_nt(NodeP a, NodeP b) {
    int n = a->v().rows(), k = a->v().cols(), m = b->v().rows();
    NodeP out = alloc({n, m}, a->tracked() || b->tracked());
    for (int r = 0; r < n; ++r) {
      const T* ar = a->v().row(r);
      T* dst = out->value->row(r);
      for (int c = 0; c < m; ++c) {
        const T* br = b->v().row(c);
        T acc = T(0);
        for (int i = 0; i < k; ++i) acc += ar[i] * br[i];
        dst[c] = acc;
      }
    }
    if (out->tracked()) {
      steps_.push_back([a, b, out, n, k, m] {
        for (int r = 0; r < n; ++r) {
          const T* go = out->grad->row(r);
          const T* ar = a->v().row(r);
          for (int c = 0; c < m; ++c) {
            T g = go[c];
            if (g == T(0)) continue;
            const T* br = b->v().row(c);
            if (a->tracked()) {
              T* ga = a->g().row(r);
              for (int i = 0; i < k; ++i) ga[i] += g * br[i];
            }
            if (b->tracked()) {
              T* gb = b->g().row(c);
              for (int i = 0; i < k; ++i) gb[i] += g * ar[i];
            }
          }
        }
      });
    }
    return out;
  }

  /// a [N, K] * b [K, M] -> [N, M]
  NodeP matmul(NodeP a, NodeP b) {
    int n = a->v().rows(), k = a->v().cols(), m = b->v().cols();
    NodeP out = alloc({n, m}, a->tracked() || b->tracked());
    for (int r = 0; r < n; ++r) {
      const T* ar = a->v().row(r);
      T* dst = out->value->row(r);
      for (int i = 0; i < k; ++i) {
        T av = ar[i];
        if (av == T(0)) continue;
        const T* br = b->v().row(i);
        for (int j = 0; j < m; ++j) dst[j] += av * br[j];
      }
    }
    if (out->tracked()) {
      steps_.push_back([a, b, out, n, k, m] {
        for (int r = 0; r < n; ++r) {
          const T* go = out->grad->row(r);
          const T* ar = a->v().row(r);
          if (a->tracked()) {
            T* ga = a->g().row(r);
            for (int i = 0; i < k; ++i) {
              const T* br = b->v().row(i);
              T acc = T(0);
              for (int j = 0; j < m; ++j) acc += br[j] * go[j];
              ga[i] += acc;
            }
          }
          if (b->tracked()) {
            for (int i = 0; i < k; ++i) {
              T av = ar[i];
              if (av == T(0)) continue;
              T* gb = b->g().row(i);
              for (int j = 0; j < m; ++j) gb[j] += av * go[j];
            }
          }
        }
      });
    }
    return out;
  }

  NodeP scale(NodeP x, T c) {
    NodeP out = alloc(x->v().shape, x->tracked());
    for (size_t i = 0; i < x->v().numel(); ++i) out->value->data[i] = x->v().data[i] * c;
    if (out->tracked()) {
      steps_.push_back([x, out, c] {
        for (size_t i = 0; i < out->grad->numel(); ++i) x->g().data[i] += c * out->grad->data[i];
      });
    }
    return out;
  }

  NodeP add(NodeP a, NodeP b) {
    NodeP out = alloc(a->v().shape, a->tracked() || b->tracked());
    for (size_t i = 0; i < a->v().numel(); ++i)
      out->value->data[i] = a->v().data[i] + b->v().data[i];
    if (out->tracked()) {
      steps_.push_back([a, b, out] {
        for (size_t i = 0; i < out->grad->numel(); ++i) {
          T g = out->grad->data[i];
          if (a->tracked()) a->g().data[i] += g;
          if (b->tracked()) b->g().data[i] += g;
        }
      });
    }
    return out;
  }

  NodeP relu(NodeP x) {
    NodeP out = alloc(x->v().shape, x->tracked());
    for (size_t i = 0; i < x->v().numel(); ++i) {
      T v = x->v().data[i];
      out->value->data[i] = v > T(0) ? v : T(0);
    }
    if (out->tracked()) {
      steps_.push_back([x, out] {
        for (size_t i = 0; i < out->grad->numel(); ++i)
          if (x->v().data[i] > T(0)) x->g().data[i] += out->grad->data[i];
      });
    }
    return out;
  }

  /// Row-wise softmax over the first valid_cols columns; the rest output 0.
  NodeP row_softmax_masked(NodeP x, int valid_cols) {
    int n = x->v().rows(), m = x->v().cols();
    NodeP out = alloc({n, m}, x->tracked());
    for (int r = 0; r < n; ++r) {
      const T* xr = x->v().row(r);
      T* yr = out->value->row(r);
      T mx = xr[0];
      for (int j = 1; j < valid_cols; ++j) mx = std::max(mx, xr[j]);
      T sum = T(0);
      for (int j = 0; j < valid_cols; ++j) {
        yr[j] = std::exp(xr[j] - mx);
        sum += yr[j];
      }
      T inv = T(1) / sum;
      for (int j = 0; j < valid_cols; ++j) yr[j] *= inv;
    }
    if (out->tracked()) {
      steps_.push_back([x, out, n, valid_cols] {
        for (int r = 0; r < n; ++r) {
          const T* y = out->value->row(r);
          const T* gy = out->grad->row(r);
          T dot = T(0);
          for (int j = 0; j < valid_cols; ++j) dot += gy[j] * y[j];
          T* gx = x->g().row(r);
          for (int j = 0; j < valid_cols; ++j) gx[j] += y[j] * (gy[j] - dot);
        }
      });
    }
    return out;
  }

  /// Mean of the first valid_rows rows -> [1, C].
  NodeP mean_rows_masked(NodeP x, int valid_rows) {
    int c = x->v().cols();
    NodeP out = alloc({1, c}, x->tracked());
    T inv = T(1) / static_cast<T>(valid_rows);
    for (int r = 0; r < valid_rows; ++r) {
      const T* xr = x->v().row(r);
      for (int j = 0; j < c; ++j) out->value->data[j] += xr[j];
    }
    for (int j = 0; j < c; ++j) out->value->data[j] *= inv;
    if (out->tracked()) {
      steps_.push_back([x, out, valid_rows, c, inv] {
        for (int r = 0; r < valid_rows; ++r) {
          T* gx = x->g().row(r);
          for (int j = 0; j < c; ++j) gx[j] += inv * out->grad->data[j];
        }
      });
    }
    return out;
  }

 private:
  NodeP alloc(std::vector<int> shape, bool tracked) {
    Node& n = nodes_.emplace_back();
    n.owned_value = Tensor<T>(shape);
    n.value = &n.owned_value;
    if (tracked) {
      n.owned_grad = Tensor<T>(std::move(shape));
      n.grad = &n.owned_grad;
    }
    return &n;
  }

  std::deque<Node> nodes_;
  std::vector<std::function<void()>> steps_;
};

}  // namespace urlbench::nn
