// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The capo authors

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace capo {

namespace detail {

// SplitMix64 step; used to expand seeds and to derive independent streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Seeded random generator with platform-independent output.
///
/// The engine is std::mt19937_64 (bit-exact by the standard); all value
/// transforms (uniform, normal, categorical) are implemented here instead of
/// relying on the implementation-defined std <random> distributions, so runs
/// reproduce bit-identically across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t s = seed;
    gen_.seed(detail::splitmix64(s));
  }

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform double in [0, 1), 53 random bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [lo, hi], inclusive. Unbiased via rejection.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw std::invalid_argument("uniform_int: empty range");
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(next_u64());  // full range
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return lo + static_cast<std::int64_t>(x % span);
  }

  /// Normal via Box-Muller; caches the second variate.
  double normal(double mean, double sd) {
    if (have_cached_) {
      have_cached_ = false;
      return mean + sd * cached_;
    }
    double u1 = 1.0 - uniform01();  // (0, 1]
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * 3.14159265358979323846 * u2;
    cached_ = r * std::sin(theta);
    have_cached_ = true;
    return mean + sd * r * std::cos(theta);
  }

  /// Index sampled from an (approximately normalized) probability vector.
  int categorical(std::span<const double> probs) {
    if (probs.empty()) throw std::invalid_argument("categorical: empty");
    double total = 0.0;
    for (double p : probs) total += p;
    double u = uniform01() * total;
    double c = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      c += probs[i];
      if (u < c) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size() - 1);
  }

  /// k distinct indices from [0, n), in shuffle order.
  std::vector<int> sample_without_replacement(int n, int k) {
    if (k > n) throw std::invalid_argument("sample_without_replacement: k > n");
    std::vector<int> idx(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    for (int i = 0; i < k; ++i) {
      int j = static_cast<int>(uniform_int(i, n - 1));
      std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    idx.resize(static_cast<std::size_t>(k));
    return idx;
  }

  /// Independent stream keyed by `stream`; derivation does not consume state.
  Rng derive(std::uint64_t stream) const {
    std::uint64_t s = seed_ ^ (0xA0761D6478BD642FULL * (stream + 1));
    return Rng(detail::splitmix64(s));
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace capo
