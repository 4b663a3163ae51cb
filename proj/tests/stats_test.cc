// Copyright 2026 The serpaudit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.

#include "serpaudit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "serpaudit/errors.hpp"
#include "serpaudit/rng.hpp"
#include "oracles.hpp"

namespace serpaudit {
namespace {

using stats::MwuMode;
using stats::StatResult;

// Distinct doubles so that exact enumeration applies.
std::vector<double> distinct_values(rng::Stream& s, std::size_t n,
                                    std::size_t pool) {
  std::vector<std::size_t> idx = s.sample_indices(pool, n);
  std::vector<double> out;
  for (std::size_t i : idx) out.push_back(static_cast<double>(i) * 1.25);
  return out;
}

TEST(MannWhitney, PinnedSmallCase) {
  StatResult exact =
      stats::mann_whitney_u({1, 2}, {3, 4}, MwuMode::kExact);
  EXPECT_DOUBLE_EQ(exact.statistic, 0.0);
  EXPECT_NEAR(exact.p_value, 1.0 / 3.0, 1e-15);

  StatResult normal =
      stats::mann_whitney_u({1, 2}, {3, 4}, MwuMode::kNormal);
  EXPECT_NEAR(normal.p_value,
              oracles::mwu_normal_p_no_ties({1, 2}, {3, 4}), 1e-15);
  EXPECT_NEAR(normal.p_value, 0.2453, 2e-4);
}

TEST(MannWhitney, ExactMatchesEnumerationOracle) {
  rng::Stream s(20260601);
  for (int trial = 0; trial < 150; ++trial) {
    std::size_t n = 1 + static_cast<std::size_t>(s.below(5));
    std::size_t m = 1 + static_cast<std::size_t>(s.below(5));
    std::vector<double> merged = distinct_values(s, n + m, 40);
    std::vector<double> a(merged.begin(), merged.begin() + n);
    std::vector<double> b(merged.begin() + n, merged.end());
    StatResult r = stats::mann_whitney_u(a, b, MwuMode::kExact);
    EXPECT_NEAR(r.p_value, oracles::mwu_exact_p(a, b), 1e-12);
    EXPECT_DOUBLE_EQ(r.statistic,
                     std::min(oracles::u_of(a, b), oracles::u_of(b, a)));
  }
}

TEST(MannWhitney, NormalMatchesClosedFormWithoutTies) {
  rng::Stream s(20260602);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = 3 + static_cast<std::size_t>(s.below(10));
    std::size_t m = 3 + static_cast<std::size_t>(s.below(10));
    std::vector<double> merged = distinct_values(s, n + m, 60);
    std::vector<double> a(merged.begin(), merged.begin() + n);
    std::vector<double> b(merged.begin() + n, merged.end());
    StatResult r = stats::mann_whitney_u(a, b, MwuMode::kNormal);
    EXPECT_NEAR(r.p_value, oracles::mwu_normal_p_no_ties(a, b), 1e-12);
  }
}

TEST(MannWhitney, TieCorrectedVariance) {
  std::vector<double> a = {1, 2, 2, 3};
  std::vector<double> b = {2, 3, 4};
  StatResult r = stats::mann_whitney_u(a, b, MwuMode::kNormal);

  // Reference: midrank U and the tie-corrected variance written out by hand.
  std::vector<double> pooled = {1, 2, 2, 3, 2, 3, 4};
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
  double n = 4, m = 3, big_n = 7;
  double var =
      n * m / 12.0 * ((big_n + 1.0) - tie_term / (big_n * (big_n - 1.0)));
  double u = std::min(oracles::u_of(a, b), oracles::u_of(b, a));
  double z = (std::fabs(u - n * m / 2.0) - 0.5) / std::sqrt(var);
  EXPECT_NEAR(r.p_value, std::erfc(z / std::sqrt(2.0)), 1e-12);
}

TEST(MannWhitney, AutoSwitchesOnSizeAndTies) {
  // Small and tie-free: auto equals exact.
  std::vector<double> a = {1, 2, 5};
  std::vector<double> b = {3, 4};
  EXPECT_DOUBLE_EQ(stats::mann_whitney_u(a, b).p_value,
                   stats::mann_whitney_u(a, b, MwuMode::kExact).p_value);

  // Ties force the normal path even for tiny samples.
  std::vector<double> ta = {1, 2, 2};
  std::vector<double> tb = {2, 3};
  EXPECT_DOUBLE_EQ(stats::mann_whitney_u(ta, tb).p_value,
                   stats::mann_whitney_u(ta, tb, MwuMode::kNormal).p_value);

  // Large samples fall back to the normal approximation.
  std::vector<double> la, lb;
  for (int i = 0; i < 8; ++i) la.push_back(i * 2.0);
  for (int i = 0; i < 8; ++i) lb.push_back(i * 2.0 + 1.0);
  EXPECT_DOUBLE_EQ(stats::mann_whitney_u(la, lb).p_value,
                   stats::mann_whitney_u(la, lb, MwuMode::kNormal).p_value);
}

TEST(MannWhitney, FullyTiedDataIsDegenerate) {
  StatResult r = stats::mann_whitney_u({2, 2, 2}, {2, 2});
  EXPECT_TRUE(r.degenerate);
  EXPECT_DOUBLE_EQ(r.p_value, 1.0);
}

TEST(MannWhitney, RejectsEmptyGroups) {
  EXPECT_THROW(stats::mann_whitney_u({}, {1.0}), Error);
  EXPECT_THROW(stats::mann_whitney_u({1.0}, {}), Error);
}

TEST(Stars, StrictThresholdsOnAdjustedP) {
  auto stars_of = [](double p_adjusted) {
    StatResult r;
    r.p_value = p_adjusted;
    r.family_size = 1;
    stats::finalize(r);
    return stats::to_string(r.stars);
  };
  EXPECT_EQ(stars_of(0.05), "");
  EXPECT_EQ(stars_of(0.0499), "*");
  EXPECT_EQ(stars_of(0.01), "*");
  EXPECT_EQ(stars_of(0.0099), "**");
  EXPECT_EQ(stars_of(0.001), "**");
  EXPECT_EQ(stars_of(0.0009), "***");
}

TEST(Bonferroni, UnclampedMultiplication) {
  StatResult strong;
  strong.p_value = 0.002;
  StatResult weak;
  weak.p_value = 0.88;
  std::vector<StatResult> adjusted =
      stats::bonferroni({strong, weak}, 12);
  EXPECT_NEAR(adjusted[0].p_adjusted, 0.024, 1e-15);
  EXPECT_EQ(stats::to_string(adjusted[0].stars), "*");
  // No clamping at 1: the adjusted value is reported as computed.
  EXPECT_NEAR(adjusted[1].p_adjusted, 10.56, 1e-12);
  EXPECT_EQ(stats::to_string(adjusted[1].stars), "");
  EXPECT_EQ(adjusted[0].family_size, 12);
}

TEST(Bonferroni, RejectsFamilySmallerThanResults) {
  std::vector<StatResult> three(3);
  for (StatResult& r : three) r.p_value = 0.5;
  EXPECT_THROW(stats::bonferroni(three, 2), Error);
  EXPECT_THROW(stats::bonferroni(three, 0), Error);
}

TEST(Anova, PinnedThreeGroupCase) {
  StatResult r = stats::anova_oneway({{1, 2, 3}, {2, 3, 4}, {3, 4, 5}});
  EXPECT_DOUBLE_EQ(r.statistic, 3.0);
  EXPECT_NEAR(r.p_value, 0.125, 1e-3);
  EXPECT_NEAR(r.p_value, oracles::f_tail(3.0, 2, 6), 1e-6);
  // With two and six degrees of freedom the tail has the closed form
  // (1 + F/3)^{-3}, which gives exactly 1/8 at F=3.
  EXPECT_NEAR(r.p_value, 0.125, 1e-12);
}

TEST(Anova, MatchesArithmeticAndIntegrationOracles) {
  rng::Stream s(20260603);
  for (int trial = 0; trial < 40; ++trial) {
    std::size_t n_groups = 2 + static_cast<std::size_t>(s.below(3));
    std::vector<std::vector<double>> groups;
    std::vector<double> all;
    for (std::size_t g = 0; g < n_groups; ++g) {
      std::size_t n = 3 + static_cast<std::size_t>(s.below(4));
      groups.push_back(distinct_values(s, n, 200));
      for (double v : groups.back()) all.push_back(v);
    }
    double grand = 0.0;
    for (double v : all) grand += v;
    grand /= static_cast<double>(all.size());
    double ssb = 0.0, ssw = 0.0;
    for (const std::vector<double>& g : groups) {
      double mean = 0.0;
      for (double v : g) mean += v;
      mean /= static_cast<double>(g.size());
      ssb += static_cast<double>(g.size()) * (mean - grand) * (mean - grand);
      for (double v : g) ssw += (v - mean) * (v - mean);
    }
    double dfb = static_cast<double>(n_groups) - 1.0;
    double dfw = static_cast<double>(all.size()) - static_cast<double>(n_groups);
    double f = (ssb / dfb) / (ssw / dfw);

    StatResult r = stats::anova_oneway(groups);
    EXPECT_NEAR(r.statistic, f, 1e-9 * std::max(1.0, f));
    EXPECT_NEAR(r.p_value, oracles::f_tail(f, dfb, dfw), 1e-6);
  }
}

TEST(Anova, ZeroWithinVariance) {
  // Equal group means with zero within-variance: no signal at all.
  StatResult flat = stats::anova_oneway({{2, 2}, {2, 2}, {2, 2}});
  EXPECT_TRUE(flat.degenerate);
  EXPECT_FALSE(flat.infinite_f);
  EXPECT_DOUBLE_EQ(flat.statistic, 0.0);
  EXPECT_DOUBLE_EQ(flat.p_value, 1.0);

  // Distinct constant groups: the separation is perfect.
  StatResult split = stats::anova_oneway({{1, 1}, {2, 2}});
  EXPECT_TRUE(split.infinite_f);
  EXPECT_FALSE(split.degenerate);
  EXPECT_TRUE(std::isinf(split.statistic));
  EXPECT_DOUBLE_EQ(split.p_value, 0.0);
}

TEST(Anova, RejectsDegenerateShapes) {
  EXPECT_THROW(stats::anova_oneway({{1, 2}}), Error);
  EXPECT_THROW(stats::anova_oneway({{1, 2}, {3}}), Error);
}

TEST(IncompleteBeta, MatchesIntegrationOracle) {
  for (double a : {0.5, 1.0, 2.5, 6.0})
    for (double b : {0.5, 1.0, 3.0})
      for (double x : {0.05, 0.3, 0.5, 0.9})
        EXPECT_NEAR(stats::incomplete_beta(a, b, x),
                    oracles::inc_beta_by_integration(a, b, x), 1e-6);
  EXPECT_DOUBLE_EQ(stats::incomplete_beta(2.0, 3.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(stats::incomplete_beta(2.0, 3.0, 1.0), 1.0);
  EXPECT_THROW(stats::incomplete_beta(0.0, 1.0, 0.5), Error);
}

TEST(Quantile, PinnedTypeSevenValues) {
  std::vector<double> sorted = {1, 2, 3, 4};
  EXPECT_NEAR(stats::quantile_sorted(sorted, 0.025), 1.075, 1e-12);
  EXPECT_NEAR(stats::quantile_sorted(sorted, 0.975), 3.925, 1e-12);
  EXPECT_DOUBLE_EQ(stats::quantile_sorted(sorted, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(stats::quantile_sorted(sorted, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(stats::quantile_sorted(sorted, 0.5), 2.5);
}

TEST(Quantile, MatchesOracleOnRandomData) {
  rng::Stream s(5);
  std::vector<double> values;
  for (int i = 0; i < 31; ++i) values.push_back(s.u01());
  std::sort(values.begin(), values.end());
  for (double q : {0.01, 0.25, 0.33, 0.66, 0.99})
    EXPECT_NEAR(stats::quantile_sorted(values, q),
                oracles::quantile_type7(values, q), 1e-12);
}

TEST(Bootstrap, DeterministicGivenSeed) {
  std::vector<double> values;
  rng::Stream s(123);
  for (int i = 0; i < 50; ++i) values.push_back(s.u01() * 10.0);
  stats::BootstrapCI a = stats::bootstrap_ci(values, 2000, 0.95, 42);
  stats::BootstrapCI b = stats::bootstrap_ci(values, 2000, 0.95, 42);
  EXPECT_DOUBLE_EQ(a.lo, b.lo);
  EXPECT_DOUBLE_EQ(a.hi, b.hi);
  stats::BootstrapCI c = stats::bootstrap_ci(values, 2000, 0.95, 43);
  EXPECT_NE(a.lo, c.lo);
}

TEST(Bootstrap, WorkerCountDoesNotChangeTheInterval) {
  // Each resample draws from its own forked stream, so the parallel split
  // cannot reorder the randomness.
  std::vector<double> values;
  rng::Stream s(321);
  for (int i = 0; i < 40; ++i) values.push_back(s.u01());
  stats::BootstrapCI one = stats::bootstrap_ci(values, 1500, 0.95, 9, 1);
  stats::BootstrapCI four = stats::bootstrap_ci(values, 1500, 0.95, 9, 4);
  EXPECT_DOUBLE_EQ(one.lo, four.lo);
  EXPECT_DOUBLE_EQ(one.hi, four.hi);
  EXPECT_DOUBLE_EQ(one.mean, four.mean);
}

TEST(Bootstrap, BracketsTheMeanOnWellBehavedData) {
  std::vector<double> values;
  rng::Stream s(777);
  for (int i = 0; i < 200; ++i) values.push_back(s.u01());
  stats::BootstrapCI ci = stats::bootstrap_ci(values, 4000, 0.95, 1);
  EXPECT_LT(ci.lo, ci.mean);
  EXPECT_GT(ci.hi, ci.mean);
  EXPECT_NEAR(ci.mean, stats::mean_of(values), 1e-15);
  EXPECT_EQ(ci.resamples, 4000);
}

TEST(Bootstrap, SingleValueCollapses) {
  stats::BootstrapCI ci = stats::bootstrap_ci({3.5}, 100, 0.95, 0);
  EXPECT_DOUBLE_EQ(ci.lo, 3.5);
  EXPECT_DOUBLE_EQ(ci.hi, 3.5);
  EXPECT_THROW(stats::bootstrap_ci({}, 100, 0.95, 0), Error);
  EXPECT_THROW(stats::bootstrap_ci({1.0}, 0, 0.95, 0), Error);
  EXPECT_THROW(stats::bootstrap_ci({1.0}, 10, 1.5, 0), Error);
}

}  // namespace
}  // namespace serpaudit
