// Copyright 2026 The serpaudit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.

#ifndef SERPAUDIT_RNG_HPP
#define SERPAUDIT_RNG_HPP

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace serpaudit::rng {

// splitmix64 step. Small state, full 64-bit period, and the output is a
// pure function of the state, which keeps every seeded computation in the
// project portable across platforms and compilers (no std:: distribution
// is ever used on a determinism-critical path).
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// A forkable deterministic random stream. fork() derives an independent
// child stream from a tag, so parallel consumers can draw without any
// ordering dependence between them.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : state_(seed ^ 0x6a09e667f3bcc908ULL) {
    // Warm up so that small seeds do not produce correlated first draws.
    next();
    next();
  }

  std::uint64_t next() { return splitmix64(state_); }

  Stream fork(std::uint64_t tag) const {
    std::uint64_t s = state_;
    s ^= 0x9e3779b97f4a7c15ULL * (tag + 1);
    return Stream(splitmix64(s));
  }

  Stream fork(std::string_view tag) const { return fork(fnv1a64(tag)); }

  // Uniform in [0, 1): 53 random mantissa bits.
  double u01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

  // Uniform integer in [0, n). Multiply-shift; the bias is O(n / 2^64) and
  // irrelevant at the sample sizes used here.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  std::int64_t range(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  // Standard normal via Box-Muller (one value per call; the pair's second
  // member is discarded to keep the stream position predictable).
  double normal01() {
    double u1 = u01();
    double u2 = u01();
    while (u1 <= 0.0) u1 = u01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  // Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // k distinct indices from [0, n), selection without replacement, order of
  // first k positions of a partial shuffle.
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = 0; i < k && i + 1 < n; ++i) {
      std::size_t j = i + static_cast<std::size_t>(below(n - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(k < n ? k : n);
    return idx;
  }

 private:
  std::uint64_t state_;
};

}  // namespace serpaudit::rng

#endif  // SERPAUDIT_RNG_HPP
