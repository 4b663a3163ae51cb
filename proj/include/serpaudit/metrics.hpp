// Copyright 2026 The serpaudit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.
//
// Pure rank-similarity kernels over ordered item lists. All functions are
// deterministic and side-effect free.

#ifndef SERPAUDIT_METRICS_HPP
#define SERPAUDIT_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <unordered_set>
#include <vector>

#include "serpaudit/errors.hpp"
#include "serpaudit/model.hpp"

namespace serpaudit::metrics {

using RankedList = std::vector<std::string>;

enum class RboVariant {
  kExtrapolated,  // assume observed agreement persists beyond depth k
  kTruncated,     // score only the observed prefix (identical lists < 1)
};

namespace detail {

inline void require_duplicate_free(const RankedList& items,
                                   const char* which) {
  std::unordered_set<std::string_view> seen;
  for (const std::string& item : items)
    if (!seen.insert(item).second)
      throw Error(std::string(which) + " list contains duplicate '" + item +
                  "'");
}

}  // namespace detail

// Rank-biased overlap of two duplicate-free lists, evaluated over the first
// k = min(|S|,|T|) positions with persistence p. With X_d the size of the
// depth-d prefix intersection:
//   truncated:     ((1-p)/p) * sum_{d=1..k} (X_d/d) p^d
//   extrapolated:  above + (X_k/k) p^k
// Identical prefixes score exactly 1 under extrapolation; disjoint lists
// score exactly 0 under both variants.
inline double rbo(const RankedList& s, const RankedList& t, double p,
                  RboVariant variant = RboVariant::kExtrapolated) {
  if (!(p > 0.0 && p < 1.0)) throw Error("rbo: p must lie in (0,1)");
  if (s.empty() || t.empty()) throw Error("rbo: lists must be non-empty");
  detail::require_duplicate_free(s, "first");
  detail::require_duplicate_free(t, "second");

  const std::size_t k = std::min(s.size(), t.size());
  std::unordered_set<std::string_view> s_only;
  std::unordered_set<std::string_view> t_only;
  std::size_t overlap = 0;  // X_d after processing depth d
  bool prefixes_equal = true;
  double weighted_sum = 0.0;  // sum of (X_d/d) p^d
  double pd = 1.0;            // p^d
  for (std::size_t d = 1; d <= k; ++d) {
    const std::string& x = s[d - 1];
    const std::string& y = t[d - 1];
    if (x == y) {
      ++overlap;
    } else {
      prefixes_equal = false;
      if (t_only.erase(x) > 0)
        ++overlap;
      else
        s_only.insert(x);
      if (s_only.erase(y) > 0)
        ++overlap;
      else
        t_only.insert(y);
    }
    pd *= p;
    weighted_sum += (static_cast<double>(overlap) / static_cast<double>(d)) *
                    pd;
  }

  if (variant == RboVariant::kExtrapolated && prefixes_equal) return 1.0;
  if (overlap == 0) return 0.0;  // X_d is nondecreasing, so all terms vanish

  double value = ((1.0 - p) / p) * weighted_sum;
  if (variant == RboVariant::kExtrapolated)
    value += (static_cast<double>(overlap) / static_cast<double>(k)) * pd;
  return std::clamp(value, 0.0, 1.0);
}

inline double rbo_ext(const RankedList& s, const RankedList& t, double p) {
  return rbo(s, t, p, RboVariant::kExtrapolated);
}

// Divergence D = 1 - RBO. Identical prefixes give exactly 0, disjoint lists
// exactly 1 (under extrapolation).
inline double d_metric(const RankedList& s, const RankedList& t,
                       const MetricConfig& cfg,
                       RboVariant variant = RboVariant::kExtrapolated) {
  return 1.0 - rbo(s, t, cfg.p, variant);
}

// Fraction of total RBO mass carried by ranks 1..k:
//   1 - p^(k-1) + k ((1-p)/p) (ln(1/(1-p)) - sum_{i=1..k-1} p^i / i)
inline double prefix_weight(double p, int k) {
  if (!(p > 0.0 && p < 1.0)) throw Error("prefix_weight: p must lie in (0,1)");
  if (k < 1) throw Error("prefix_weight: k must be >= 1");
  double tail_sum = 0.0;  // sum_{i=1..k-1} p^i / i
  double pi = 1.0;
  for (int i = 1; i <= k - 1; ++i) {
    pi *= p;
    tail_sum += pi / static_cast<double>(i);
  }
  double pk1 = std::pow(p, k - 1);
  return 1.0 - pk1 + static_cast<double>(k) * ((1.0 - p) / p) *
                         (std::log(1.0 / (1.0 - p)) - tail_sum);
}

// Levenshtein distance with unit insert/delete/substitute costs.
inline int edit_distance(const RankedList& s, const RankedList& t) {
  const std::size_t n = s.size();
  const std::size_t m = t.size();
  std::vector<int> prev(m + 1);
  std::vector<int> curr(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    curr[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= m; ++j) {
      int sub = prev[j - 1] + (s[i - 1] == t[j - 1] ? 0 : 1);
      curr[j] = std::min({prev[j] + 1, curr[j - 1] + 1, sub});
    }
    std::swap(prev, curr);
  }
  return prev[m];
}

namespace detail {

inline std::unordered_set<std::string_view> prefix_set(const RankedList& items,
                                                       int k) {
  std::unordered_set<std::string_view> out;
  std::size_t depth = std::min(items.size(), static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < depth; ++i) out.insert(items[i]);
  return out;
}

}  // namespace detail

// Size of the symmetric difference of the depth-k prefix sets. Lists shorter
// than k contribute their whole extent.
inline int symdiff_top_k(const RankedList& s, const RankedList& t, int k) {
  if (k < 1) throw Error("symdiff_top_k: k must be >= 1");
  auto sa = detail::prefix_set(s, k);
  auto sb = detail::prefix_set(t, k);
  int common = 0;
  for (std::string_view item : sa)
    if (sb.count(item)) ++common;
  return static_cast<int>(sa.size()) + static_cast<int>(sb.size()) -
         2 * common;
}

// Size of the intersection of the depth-k prefix sets.
inline int common_top_k(const RankedList& s, const RankedList& t, int k = 3) {
  if (k < 1) throw Error("common_top_k: k must be >= 1");
  auto sa = detail::prefix_set(s, k);
  auto sb = detail::prefix_set(t, k);
  int common = 0;
  for (std::string_view item : sa)
    if (sb.count(item)) ++common;
  return common;
}

// Maps each result's domain through catmap and occurrence-indexes the tokens
// (News, News -> News#1, News#2) so downstream prefix-intersection metrics
// see duplicate-free lists. Rank order is preserved.
inline RankedList to_category_sequence(
    const std::vector<RankedResult>& results,
    const std::map<std::string, std::string>& catmap) {
  RankedList out;
  out.reserve(results.size());
  std::map<std::string, int> occurrence;
  for (const RankedResult& r : results) {
    auto it = catmap.find(r.domain);
    if (it == catmap.end())
      throw Error("no category for domain '" + r.domain + "'");
    int n = ++occurrence[it->second];
    out.push_back(it->second + "#" + std::to_string(n));
  }
  return out;
}

}  // namespace serpaudit::metrics

#endif  // SERPAUDIT_METRICS_HPP
