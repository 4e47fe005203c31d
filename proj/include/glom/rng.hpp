#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <glom/core.hpp>

namespace glom {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Derives an independent child seed from a base seed and a stream index.
// Fixed arithmetic, so parallel workers can be seeded reproducibly.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(base ^ splitmix64(stream + 0x632be59bd9b4e019ull));
}

// Deterministic RNG. Distributions are implemented here rather than with
// std::*_distribution so that sequences are identical across standard
// libraries and platforms.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t bits() { return gen_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Multiply-shift; bias is < n / 2^64.
  std::uint64_t uniform_int(std::uint64_t n) {
    if (n == 0) throw InvalidArgument("uniform_int: n must be positive");
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(bits()) * n) >> 64);
  }

  // Standard normal via Box-Muller. No caching, so the consumed stream
  // length per call is fixed.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_int(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Index draw proportional to non-negative weights.
  std::size_t discrete(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (total <= 0.0) throw InvalidArgument("discrete: weights sum to zero");
    double r = uniform() * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      r -= weights[i];
      if (r < 0.0) return i;
    }
    return weights.size() - 1;
  }

private:
  std::mt19937_64 gen_;
};

}  // namespace glom
