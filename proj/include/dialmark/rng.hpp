#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace dialmark {

// Deterministic random stream with named substream derivation. Every piece of
// randomness in a benchmark cell hangs off one root key, so a cell produces the
// same numbers no matter which thread runs it or what ran before it.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t key) : key_(key), gen_(mix(key)) {}

  // Child stream keyed by (this stream's key, label, index). Derivation only
  // reads the key, never the generator state, so substreams are independent of
  // how much the parent has been consumed.
  RandomStream substream(std::string_view label, std::uint64_t index = 0) const {
    std::uint64_t h = key_;
    h = fnv1a(h, label);
    h = fnv1a(h, index);
    return RandomStream(h);
  }

  std::uint64_t key() const { return key_; }

  // Uniform in [0, 1). 53-bit mantissa so values are exactly representable.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). n must be positive.
  int uniform_int(int n) { return static_cast<int>(gen_() % static_cast<std::uint64_t>(n)); }

  bool bernoulli(double p) { return uniform01() < p; }

  double normal(double mu = 0.0, double sigma = 1.0) {
    // Box-Muller, no caching: two draws per call keeps the stream state simple.
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    return mu + sigma * r * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Marsaglia-Tsang; valid for shape >= 1 which is all we use.
  double gamma(double shape) {
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      double u = uniform01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double beta(double a, double b) {
    double x = gamma(a);
    double y = gamma(b);
    return x / (x + y);
  }

  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[uniform_int(static_cast<int>(v.size()))];
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
      int j = uniform_int(i + 1);
      std::swap(v[i], v[j]);
    }
  }

  // Distinct k-subset of {0..n-1} in sorted order.
  std::vector<int> sample_indices(int n, int k) {
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    shuffle(all);
    all.resize(k);
    std::sort(all.begin(), all.end());
    return all;
  }

  static std::uint64_t fnv1a(std::uint64_t h, std::string_view s) {
    if (h == 0) h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
    return h;
  }

  static std::uint64_t fnv1a(std::uint64_t h, std::uint64_t x) {
    for (int i = 0; i < 8; ++i) {
      h ^= (x >> (8 * i)) & 0xff;
      h *= 1099511628211ull;
    }
    return h;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    // splitmix64 finalizer; avoids mt19937_64's weak low-entropy seeding.
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::mt19937_64 gen_;
};

}  // namespace dialmark
