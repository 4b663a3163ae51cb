// Copyright 2026 The serpaudit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.
//
// Independent reference implementations used to cross-check the library.
// Everything here is written the slow, obvious way on purpose: prefix
// intersections via std::set, full DP matrices, exhaustive enumeration and
// numeric integration, so that a bug in the library cannot hide in a shared
// shortcut.

#ifndef SERPAUDIT_TESTS_ORACLES_HPP_
#define SERPAUDIT_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <set>
#include <string>
#include <vector>

namespace oracles {

// Overlap |S_{1:d} ∩ T_{1:d}| computed from scratch with std::set.
inline std::size_t prefix_overlap(const std::vector<std::string>& s,
                                  const std::vector<std::string>& t,
                                  std::size_t d) {
  std::set<std::string> a(s.begin(), s.begin() + std::min(d, s.size()));
  std::set<std::string> b(t.begin(), t.begin() + std::min(d, t.size()));
  std::size_t shared = 0;
  for (const std::string& x : a) shared += b.count(x);
  return shared;
}

// Rank-biased overlap, truncated at depth k = min(|S|, |T|).
inline double rbo_truncated(const std::vector<std::string>& s,
                            const std::vector<std::string>& t, double p) {
  std::size_t k = std::min(s.size(), t.size());
  double sum = 0.0;
  for (std::size_t d = 1; d <= k; ++d)
    sum += static_cast<double>(prefix_overlap(s, t, d)) /
           static_cast<double>(d) * std::pow(p, static_cast<double>(d));
  return (1.0 - p) / p * sum;
}

// Extrapolated rank-biased overlap: the truncated sum plus the tail term
// that assumes the depth-k agreement persists beyond the seen prefix.
inline double rbo_extrapolated(const std::vector<std::string>& s,
                               const std::vector<std::string>& t, double p) {
  std::size_t k = std::min(s.size(), t.size());
  if (k == 0) return 0.0;
  double xk = static_cast<double>(prefix_overlap(s, t, k));
  return xk / static_cast<double>(k) * std::pow(p, static_cast<double>(k)) +
         rbo_truncated(s, t, p);
}

// Classic full-matrix Levenshtein distance.
inline int edit_distance(const std::vector<std::string>& s,
                         const std::vector<std::string>& t) {
  std::size_t n = s.size(), m = t.size();
  std::vector<std::vector<int>> d(n + 1, std::vector<int>(m + 1, 0));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = static_cast<int>(i);
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= m; ++j)
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1,
                          d[i - 1][j - 1] + (s[i - 1] == t[j - 1] ? 0 : 1)});
  return d[n][m];
}

// |top_k(S) Δ top_k(T)| via set algebra.
inline int symdiff_top_k(const std::vector<std::string>& s,
                         const std::vector<std::string>& t, std::size_t k) {
  std::set<std::string> a(s.begin(), s.begin() + std::min(k, s.size()));
  std::set<std::string> b(t.begin(), t.begin() + std::min(k, t.size()));
  int count = 0;
  for (const std::string& x : a) count += b.count(x) == 0 ? 1 : 0;
  for (const std::string& x : b) count += a.count(x) == 0 ? 1 : 0;
  return count;
}

inline int common_top_k(const std::vector<std::string>& s,
                        const std::vector<std::string>& t, std::size_t k) {
  return static_cast<int>(prefix_overlap(s, t, k));
}

// U statistic of group A against group B with the tie convention that each
// tied cross pair contributes one half.
inline double u_of(const std::vector<double>& a, const std::vector<double>& b) {
  double u = 0.0;
  for (double x : a)
    for (double y : b) {
      if (x > y)
        u += 1.0;
      else if (x == y)
        u += 0.5;
    }
  return u;
}

// Exact two-sided Mann-Whitney p by exhausting every way to split the pooled
// values into groups of the observed sizes: the fraction of labelings whose
// min(U_a, U_b) is at most the observed one.
inline double mwu_exact_p(const std::vector<double>& a,
                          const std::vector<double>& b) {
  std::vector<double> pool(a.begin(), a.end());
  pool.insert(pool.end(), b.begin(), b.end());
  std::size_t n = a.size(), total = pool.size();
  double nm = static_cast<double>(n) * static_cast<double>(total - n);
  double u_obs = std::min(u_of(a, b), nm - u_of(a, b));

  std::vector<int> mask(total, 0);
  std::fill(mask.begin(), mask.begin() + n, 1);
  std::sort(mask.begin(), mask.end());
  long hits = 0, count = 0;
  do {
    std::vector<double> ga, gb;
    for (std::size_t i = 0; i < total; ++i)
      (mask[i] == 1 ? ga : gb).push_back(pool[i]);
    double u = u_of(ga, gb);
    if (std::min(u, nm - u) <= u_obs + 1e-9) ++hits;
    ++count;
  } while (std::next_permutation(mask.begin(), mask.end()));
  return static_cast<double>(hits) / static_cast<double>(count);
}

// Normal-approximation two-sided Mann-Whitney p with continuity correction,
// written independently for the no-ties case.
inline double mwu_normal_p_no_ties(const std::vector<double>& a,
                                   const std::vector<double>& b) {
  double n = static_cast<double>(a.size());
  double m = static_cast<double>(b.size());
  double u = std::min(u_of(a, b), n * m - u_of(a, b));
  double mu = n * m / 2.0;
  double sigma = std::sqrt(n * m * (n + m + 1.0) / 12.0);
  double z = (std::fabs(u - mu) - 0.5) / sigma;
  if (z < 0.0) z = 0.0;
  return std::erfc(z / std::sqrt(2.0));
}

// Regularized incomplete beta I_x(a, b) by tanh-sinh quadrature over
// t^{a-1} (1-t)^{b-1} on (0, x). The double-exponential substitution
// t = (x/2)(1 + tanh((π/2) sinh w)) absorbs the endpoint singularities;
// reflecting through I_x(a,b) = 1 - I_{1-x}(b,a) keeps the far endpoint
// away from t = 1.
inline double inc_beta_by_integration(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  if (x > a / (a + b)) return 1.0 - inc_beta_by_integration(b, a, 1.0 - x);
  const double kHalfPi = 1.5707963267948966;
  const double h = 0.002;
  double sum = 0.0;
  for (double w = -4.5; w <= 4.5; w += h) {
    double s = kHalfPi * std::sinh(w);
    double t = 0.5 * x * (1.0 + std::tanh(s));
    double jac =
        0.5 * x * kHalfPi * std::cosh(w) / (std::cosh(s) * std::cosh(s));
    if (t <= 0.0 || t >= 1.0 || jac <= 0.0) continue;
    sum += std::pow(t, a - 1.0) * std::pow(1.0 - t, b - 1.0) * jac;
  }
  sum *= h;
  double log_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  return sum / std::exp(log_beta);
}

// Right tail of the F distribution via the beta identity
// P(F' > f) = I_{d2/(d2 + d1 f)}(d2/2, d1/2).
inline double f_tail(double f, double df1, double df2) {
  if (f <= 0.0) return 1.0;
  double x = df2 / (df2 + df1 * f);
  return inc_beta_by_integration(df2 / 2.0, df1 / 2.0, x);
}

// Type-7 quantile on a sorted sample, written from the defining formula.
inline double quantile_type7(const std::vector<double>& sorted, double q) {
  double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  std::size_t lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - std::floor(h)) * (sorted[lo + 1] - sorted[lo]);
}

// The weight of the first k ranks under the rank-biased overlap weighting,
// evaluated in extended precision from the closed form.
inline double prefix_weight(double p, int k) {
  long double lp = static_cast<long double>(p);
  long double series = 0.0L;
  long double power = 1.0L;
  for (int i = 1; i <= k - 1; ++i) {
    power *= lp;
    series += power / static_cast<long double>(i);
  }
  long double kk = static_cast<long double>(k);
  long double w = 1.0L - powl(lp, kk - 1.0L) +
                  kk * (1.0L - lp) / lp * (logl(1.0L / (1.0L - lp)) - series);
  return static_cast<double>(w);
}

}  // namespace oracles

#endif  // SERPAUDIT_TESTS_ORACLES_HPP_
