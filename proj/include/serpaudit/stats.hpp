// Copyright 2026 The serpaudit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.
//
// Statistical pipeline: bootstrap percentile confidence intervals,
// Mann-Whitney U tests (exact and normal-approximation), unclamped
// Bonferroni adjustment with significance stars, and one-way ANOVA.

#ifndef SERPAUDIT_STATS_HPP
#define SERPAUDIT_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "serpaudit/errors.hpp"
#include "serpaudit/rng.hpp"

namespace serpaudit::stats {

enum class TestKind { kMannWhitneyU, kAnovaF };

enum class Stars { kNone, kOne, kTwo, kThree };

// Star thresholds apply to the adjusted p-value, strict inequality.
inline Stars stars_for(double p_adjusted) {
  if (p_adjusted < 0.001) return Stars::kThree;
  if (p_adjusted < 0.01) return Stars::kTwo;
  if (p_adjusted < 0.05) return Stars::kOne;
  return Stars::kNone;
}

inline std::string to_string(Stars s) {
  switch (s) {
    case Stars::kNone: return "";
    case Stars::kOne: return "*";
    case Stars::kTwo: return "**";
    case Stars::kThree: return "***";
  }
  throw Error("unknown Stars");
}

struct StatResult {
  TestKind test = TestKind::kMannWhitneyU;
  std::vector<std::string> group_labels;
  double statistic = 0.0;     // U for Mann-Whitney, F for ANOVA
  double p_value = 1.0;       // raw two-sided p
  int family_size = 1;
  double p_adjusted = 1.0;    // p_value * family_size, never clamped
  Stars stars = Stars::kNone;
  bool degenerate = false;    // no variation in the pooled data
  bool infinite_f = false;    // ANOVA: zero within-variance, unequal means
};

// Recomputes the derived fields from p_value and family_size.
inline void finalize(StatResult& r) {
  r.p_adjusted = r.p_value * static_cast<double>(r.family_size);
  r.stars = stars_for(r.p_adjusted);
}

// ---------------------------------------------------------------------------
// Bootstrap percentile confidence interval for the mean.
// ---------------------------------------------------------------------------

struct BootstrapCI {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  int resamples = 0;
  std::uint64_t seed = 0;
};

// Linear-interpolation quantile (the common "type 7" estimator) of sorted
// data at fraction q in [0,1].
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw Error("quantile of empty data");
  if (sorted.size() == 1) return sorted[0];
  double h = q * static_cast<double>(sorted.size() - 1);
  std::size_t lo = static_cast<std::size_t>(std::floor(h));
  std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline double mean_of(const std::vector<double>& values) {
  if (values.empty()) throw Error("mean of empty data");
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

// Percentile CI of the resampled mean. Resample i draws only from a stream
// forked from (seed, i), so the result is independent of evaluation order
// and of how the index range is split across workers.
inline BootstrapCI bootstrap_ci(const std::vector<double>& values,
                                int resamples = 10000, double level = 0.95,
                                std::uint64_t seed = 0, int workers = 1) {
  if (values.empty()) throw Error("bootstrap_ci: values must be non-empty");
  if (!(level > 0.0 && level < 1.0))
    throw Error("bootstrap_ci: level must lie in (0,1)");
  if (resamples < 1) throw Error("bootstrap_ci: resamples must be >= 1");

  const std::size_t n = values.size();
  std::vector<double> means(static_cast<std::size_t>(resamples));
  rng::Stream root(seed);
  auto run_range = [&](int from, int to) {
    for (int i = from; i < to; ++i) {
      rng::Stream s = root.fork(static_cast<std::uint64_t>(i));
      double sum = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        sum += values[s.below(static_cast<std::uint64_t>(n))];
      means[static_cast<std::size_t>(i)] = sum / static_cast<double>(n);
    }
  };
  if (workers <= 1) {
    run_range(0, resamples);
  } else {
    std::vector<std::thread> pool;
    int chunk = (resamples + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      int from = w * chunk;
      int to = std::min(resamples, from + chunk);
      if (from >= to) break;
      pool.emplace_back(run_range, from, to);
    }
    for (std::thread& t : pool) t.join();
  }

  std::sort(means.begin(), means.end());
  BootstrapCI ci;
  ci.mean = mean_of(values);
  double alpha = 1.0 - level;
  ci.lo = quantile_sorted(means, alpha / 2.0);
  ci.hi = quantile_sorted(means, 1.0 - alpha / 2.0);
  ci.resamples = resamples;
  ci.seed = seed;
  return ci;
}

// ---------------------------------------------------------------------------
// Mann-Whitney U.
// ---------------------------------------------------------------------------

enum class MwuMode { kAuto, kExact, kNormal };

namespace detail {

// Midranks of the pooled sample (ties share the average of their positions).
inline std::vector<double> midranks(const std::vector<double>& pooled) {
  const std::size_t n = pooled.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

inline bool has_ties(std::vector<double> pooled) {
  std::sort(pooled.begin(), pooled.end());
  return std::adjacent_find(pooled.begin(), pooled.end()) != pooled.end();
}

// min(U_a, U_b) for a given choice of group-a indices into the rank vector.
inline double min_u_for(const std::vector<double>& ranks,
                        const std::vector<std::size_t>& a_idx,
                        std::size_t n, std::size_t m) {
  double ra = 0.0;
  for (std::size_t i : a_idx) ra += ranks[i];
  double ua = ra - static_cast<double>(n) * (static_cast<double>(n) + 1) / 2.0;
  double ub = static_cast<double>(n) * static_cast<double>(m) - ua;
  return std::min(ua, ub);
}

// Visits every size-n subset of {0..total-1}.
template <typename Fn>
void for_each_combination(std::size_t total, std::size_t n, Fn&& fn) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    fn(idx);
    // Advance to the next combination in lexicographic order.
    std::size_t i = n;
    while (i > 0) {
      --i;
      if (idx[i] != i + total - n) break;
      if (i == 0) return;
    }
    if (idx[i] == i + total - n) return;
    ++idx[i];
    for (std::size_t j = i + 1; j < n; ++j) idx[j] = idx[j - 1] + 1;
  }
}

inline double normal_two_sided_p(double z) {
  if (z < 0.0) z = 0.0;
  return std::erfc(z / std::sqrt(2.0));
}

}  // namespace detail

// Two-sided Mann-Whitney U test. The reported statistic is min(U_a, U_b).
// Exact mode enumerates every C(n+m, n) group labeling of the pooled data;
// Auto uses it when n+m <= 14 and the pooled data has no ties. Normal mode
// applies the tie-corrected normal approximation with continuity correction.
// Fully tied data yields p=1 with the degenerate flag set.
inline StatResult mann_whitney_u(const std::vector<double>& a,
                                 const std::vector<double>& b,
                                 MwuMode mode = MwuMode::kAuto) {
  if (a.empty() || b.empty())
    throw Error("mann_whitney_u: both groups must be non-empty");
  const std::size_t n = a.size();
  const std::size_t m = b.size();

  std::vector<double> pooled;
  pooled.reserve(n + m);
  pooled.insert(pooled.end(), a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::vector<double> ranks = detail::midranks(pooled);

  double ra = 0.0;
  for (std::size_t i = 0; i < n; ++i) ra += ranks[i];
  double ua = ra - static_cast<double>(n) * (static_cast<double>(n) + 1) / 2.0;
  double ub = static_cast<double>(n) * static_cast<double>(m) - ua;
  double u_min = std::min(ua, ub);

  StatResult r;
  r.test = TestKind::kMannWhitneyU;
  r.statistic = u_min;
  r.family_size = 1;

  bool all_identical =
      std::adjacent_find(pooled.begin(), pooled.end(),
                         std::not_equal_to<double>()) == pooled.end();
  if (all_identical) {
    r.p_value = 1.0;
    r.degenerate = true;
    finalize(r);
    return r;
  }

  bool exact = false;
  switch (mode) {
    case MwuMode::kExact: exact = true; break;
    case MwuMode::kNormal: exact = false; break;
    case MwuMode::kAuto:
      exact = (n + m <= 14) && !detail::has_ties(pooled);
      break;
  }

  if (exact) {
    // p = P(min U <= observed min U) over all equally likely labelings.
    std::uint64_t le = 0;
    std::uint64_t total = 0;
    const double eps = 1e-9;
    detail::for_each_combination(
        n + m, n, [&](const std::vector<std::size_t>& idx) {
          ++total;
          if (detail::min_u_for(ranks, idx, n, m) <= u_min + eps) ++le;
        });
    r.p_value = static_cast<double>(le) / static_cast<double>(total);
  } else {
    // Tie-corrected variance of U under H0.
    double nn = static_cast<double>(n);
    double mm = static_cast<double>(m);
    double big_n = nn + mm;
    std::vector<double> sorted = pooled;
    std::sort(sorted.begin(), sorted.end());
    double tie_term = 0.0;
    std::size_t i = 0;
    while (i < sorted.size()) {
      std::size_t j = i;
      while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
      double t = static_cast<double>(j - i + 1);
      tie_term += t * t * t - t;
      i = j + 1;
    }
    double var = (nn * mm / 12.0) *
                 ((big_n + 1.0) - tie_term / (big_n * (big_n - 1.0)));
    if (var <= 0.0) {
      r.p_value = 1.0;
      r.degenerate = true;
    } else {
      double mean_u = nn * mm / 2.0;
      double z = (std::abs(u_min - mean_u) - 0.5) / std::sqrt(var);
      r.p_value = std::min(1.0, detail::normal_two_sided_p(z));
    }
  }
  finalize(r);
  return r;
}

// ---------------------------------------------------------------------------
// Bonferroni adjustment.
// ---------------------------------------------------------------------------

// Multiplies every raw p by family_size without clamping (adjusted values
// above 1 are reported as computed) and recomputes stars.
inline std::vector<StatResult> bonferroni(std::vector<StatResult> results,
                                          int family_size) {
  if (family_size < 1) throw Error("bonferroni: family_size must be >= 1");
  if (static_cast<std::size_t>(family_size) < results.size())
    throw Error("bonferroni: family smaller than the result list");
  for (StatResult& r : results) {
    r.family_size = family_size;
    finalize(r);
  }
  return results;
}

// ---------------------------------------------------------------------------
// One-way ANOVA.
// ---------------------------------------------------------------------------

namespace detail {

// Continued-fraction kernel for the regularized incomplete beta function
// (modified Lentz algorithm).
inline double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-14;
  constexpr double kTiny = 1e-300;
  double qab = a + b;
  double qap = a + 1.0;
  double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    double dm = static_cast<double>(m);
    double aa = dm * (b - dm) * x / ((qam + 2.0 * dm) * (a + 2.0 * dm));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + dm) * (qab + dm) * x /
         ((a + 2.0 * dm) * (qap + 2.0 * dm));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
  if (a <= 0.0 || b <= 0.0) throw Error("incomplete_beta: a,b must be > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                 a * std::log(x) + b * std::log(1.0 - x);
  double bt = std::exp(ln_bt);
  if (x < (a + 1.0) / (a + b + 2.0))
    return bt * detail::beta_cf(a, b, x) / a;
  return 1.0 - bt * detail::beta_cf(b, a, 1.0 - x) / b;
}

// Survival function of the F distribution: P(F(d1, d2) > f).
inline double f_survival(double f, double d1, double d2) {
  if (f <= 0.0) return 1.0;
  double x = d2 / (d2 + d1 * f);
  return incomplete_beta(d2 / 2.0, d1 / 2.0, x);
}

// Classical one-way ANOVA over >= 2 groups of >= 2 observations each.
// Degenerate inputs are reported rather than rejected: zero within-group
// variance with equal means gives F=0, p=1 and the degenerate flag; zero
// within-group variance with unequal means gives F=inf, p=0 and the
// infinite_f flag.
inline StatResult anova_oneway(
    const std::vector<std::vector<double>>& groups,
    std::vector<std::string> labels = {}) {
  if (groups.size() < 2) throw Error("anova_oneway: need >= 2 groups");
  for (const auto& g : groups)
    if (g.size() < 2)
      throw Error("anova_oneway: every group needs >= 2 values");

  std::size_t total = 0;
  double grand_sum = 0.0;
  std::vector<double> group_mean(groups.size());
  bool all_groups_constant = true;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    group_mean[i] = mean_of(groups[i]);
    grand_sum += std::accumulate(groups[i].begin(), groups[i].end(), 0.0);
    total += groups[i].size();
    auto [lo, hi] = std::minmax_element(groups[i].begin(), groups[i].end());
    if (*lo != *hi) all_groups_constant = false;
  }
  double grand_mean = grand_sum / static_cast<double>(total);

  double ssb = 0.0;
  double ssw = 0.0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    double d = group_mean[i] - grand_mean;
    ssb += static_cast<double>(groups[i].size()) * d * d;
    for (double x : groups[i]) ssw += (x - group_mean[i]) * (x - group_mean[i]);
  }
  if (all_groups_constant) ssw = 0.0;  // suppress summation roundoff

  double dfb = static_cast<double>(groups.size()) - 1.0;
  double dfw = static_cast<double>(total) - static_cast<double>(groups.size());

  StatResult r;
  r.test = TestKind::kAnovaF;
  r.group_labels = std::move(labels);
  r.family_size = 1;
  if (ssw == 0.0) {
    bool means_equal = true;
    for (double m : group_mean)
      if (m != group_mean[0]) means_equal = false;
    if (means_equal || ssb == 0.0) {
      r.statistic = 0.0;
      r.p_value = 1.0;
      r.degenerate = true;
    } else {
      r.statistic = std::numeric_limits<double>::infinity();
      r.p_value = 0.0;
      r.infinite_f = true;
    }
  } else {
    r.statistic = (ssb / dfb) / (ssw / dfw);
    r.p_value = f_survival(r.statistic, dfb, dfw);
  }
  finalize(r);
  return r;
}

}  // namespace serpaudit::stats

#endif  // SERPAUDIT_STATS_HPP
