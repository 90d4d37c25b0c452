#pragma once

// Portable counter-based generator. The stream for a seed is
//
//   x_k = mix64(seed + k * 0x9E3779B97F4A7C15),  k = 1, 2, ...
//
// with mix64 the SplitMix64 finalizer (constants 0xBF58476D1CE4E5B9,
// 0x94D049BB133111EB, shifts 30/27/31). Doubles take the top 53 bits.
// Any language with wrapping 64-bit arithmetic reproduces it exactly.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <vector>

namespace qrc {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed for a sub-task identified by integer indices:
///   h_0 = 0, h_{j+1} = mix64(h_j ^ (index_j + gamma)), result = base ^ h_n.
/// Lets scan cells and per-observable draws run in any order.
constexpr std::uint64_t derive_seed(std::uint64_t base,
                                    std::initializer_list<std::uint64_t> indices) noexcept {
  std::uint64_t h = 0;
  for (auto i : indices) h = mix64(h ^ (i + kGoldenGamma));
  return base ^ h;
}

class Rng {
 public:
  explicit constexpr Rng(std::uint64_t seed) noexcept : seed_(seed) {}

  constexpr std::uint64_t next_u64() noexcept {
    ++counter_;
    return mix64(seed_ + counter_ * kGoldenGamma);
  }

  /// Uniform on [0, 1).
  constexpr double uniform01() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  constexpr double uniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * uniform01();
  }

  /// Uniform integer in [0, n) by 128-bit multiply-high.
  constexpr std::uint64_t below(std::uint64_t n) noexcept {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// Standard normal, one Box-Muller draw per two uniforms.
  double normal() noexcept {
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  constexpr std::uint64_t seed() const noexcept { return seed_; }
  constexpr std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

/// Fisher-Yates permutation of 0..n-1.
inline std::vector<std::size_t> permutation(std::size_t n, Rng& rng) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(p[i - 1], p[j]);
  }
  return p;
}

/// k distinct indices from 0..n-1, uniformly, returned in draw order.
inline std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

}  // namespace qrc
