#pragma once

#include <cassert>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace urlbench::nn {

/// Dense row-major tensor. Rank 1 or 2 is all the model needs.
template <typename T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    size_t n = 1;
    for (int d : shape) n *= static_cast<size_t>(d);
    data.assign(n, T(0));
  }
  Tensor(std::initializer_list<int> s) : Tensor(std::vector<int>(s)) {}

  size_t numel() const { return data.size(); }
  int rows() const { return shape.empty() ? 0 : shape[0]; }
  int cols() const { return shape.size() < 2 ? 1 : shape[1]; }

  T* row(int r) { return data.data() + static_cast<size_t>(r) * cols(); }
  const T* row(int r) const { return data.data() + static_cast<size_t>(r) * cols(); }

  void zero() { std::fill(data.begin(), data.end(), T(0)); }

  bool same_shape(const Tensor& other) const { return shape == other.shape; }
};

/// splitmix64. Fixed algorithm so seeds reproduce bit-identically across
/// standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// [0, 1)
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  uint64_t next_below(uint64_t n) { return n ? next_u64() % n : 0; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  template <typename It>
  void shuffle(It first, It last) {
    auto n = static_cast<uint64_t>(last - first);
    for (uint64_t i = n; i > 1; --i) {
      uint64_t j = next_below(i);
      std::swap(first[i - 1], first[j]);
    }
  }

 private:
  uint64_t state_;
};

}  // namespace urlbench::nn
