// Copyright 2026 The serpaudit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.

#include "serpaudit/metrics.hpp"

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "serpaudit/errors.hpp"
#include "serpaudit/model.hpp"
#include "serpaudit/rng.hpp"
#include "oracles.hpp"

namespace serpaudit {
namespace {

using metrics::RankedList;
using metrics::RboVariant;

// Draws a list of distinct synthetic URLs from a pool of `alphabet` names.
RankedList random_list(rng::Stream& s, std::size_t alphabet,
                       std::size_t max_len) {
  std::size_t len = 1 + static_cast<std::size_t>(s.below(max_len));
  std::vector<std::size_t> idx = s.sample_indices(alphabet, len);
  RankedList out;
  for (std::size_t i : idx) out.push_back("u" + std::to_string(i));
  return out;
}

TEST(Rbo, MatchesPrefixIntersectionOracle) {
  rng::Stream s(20260401);
  for (int trial = 0; trial < 1000; ++trial) {
    double p = trial % 3 == 0 ? 0.5 : (trial % 3 == 1 ? 0.7 : 0.9);
    RankedList a = random_list(s, 16, 12);
    RankedList b = random_list(s, 16, 12);
    EXPECT_NEAR(metrics::rbo_ext(a, b, p), oracles::rbo_extrapolated(a, b, p),
                1e-12);
    EXPECT_NEAR(metrics::rbo(a, b, p, RboVariant::kTruncated),
                oracles::rbo_truncated(a, b, p),
                1e-12);
  }
}

TEST(Rbo, PinnedValues) {
  RankedList abc = {"a", "b", "c"};
  RankedList bac = {"b", "a", "c"};
  EXPECT_NEAR(metrics::rbo_ext(abc, bac, 0.7), 0.7, 1e-12);

  RankedList abcd = {"a", "b", "c", "d"};
  RankedList acbe = {"a", "c", "b", "e"};
  EXPECT_NEAR(metrics::rbo_ext(abcd, acbe, 0.7), 0.80925, 1e-12);
  EXPECT_NEAR(oracles::rbo_extrapolated(abcd, acbe, 0.7), 0.80925, 1e-12);
}

TEST(Rbo, IdenticalPrefixesAreExactlyOne) {
  rng::Stream s(7);
  for (int trial = 0; trial < 200; ++trial) {
    RankedList a = random_list(s, 20, 10);
    EXPECT_EQ(metrics::rbo_ext(a, a, 0.7), 1.0);
    RankedList longer = a;
    longer.push_back("extra-tail");
    // The shared prefix matches elementwise, so extrapolation carries the
    // perfect agreement forward.
    EXPECT_EQ(metrics::rbo_ext(a, longer, 0.7), 1.0);
  }
}

TEST(Rbo, DisjointListsAreExactlyZero) {
  RankedList a = {"a1", "a2", "a3"};
  RankedList b = {"b1", "b2", "b3", "b4"};
  EXPECT_EQ(metrics::rbo_ext(a, b, 0.7), 0.0);
  EXPECT_EQ(metrics::rbo(a, b, 0.7, RboVariant::kTruncated), 0.0);
}

TEST(Rbo, Symmetric) {
  rng::Stream s(99);
  for (int trial = 0; trial < 1000; ++trial) {
    RankedList a = random_list(s, 12, 10);
    RankedList b = random_list(s, 12, 10);
    EXPECT_EQ(metrics::rbo_ext(a, b, 0.7), metrics::rbo_ext(b, a, 0.7));
    EXPECT_EQ(metrics::rbo(a, b, 0.7, RboVariant::kTruncated),
              metrics::rbo(b, a, 0.7, RboVariant::kTruncated));
  }
}

TEST(Rbo, TruncatedNeverExceedsExtrapolated) {
  rng::Stream s(3);
  for (int trial = 0; trial < 300; ++trial) {
    RankedList a = random_list(s, 10, 9);
    RankedList b = random_list(s, 10, 9);
    EXPECT_LE(metrics::rbo(a, b, 0.7, RboVariant::kTruncated),
              metrics::rbo_ext(a, b, 0.7) + 1e-15);
  }
}

TEST(Rbo, RejectsBadPersistence) {
  RankedList a = {"a"};
  EXPECT_THROW(metrics::rbo_ext(a, a, 0.0), Error);
  EXPECT_THROW(metrics::rbo_ext(a, a, 1.0), Error);
  EXPECT_THROW(metrics::rbo_ext(a, a, -0.2), Error);
}

TEST(Rbo, RejectsDuplicateEntries) {
  RankedList dup = {"a", "b", "a"};
  RankedList ok = {"a", "b"};
  EXPECT_THROW(metrics::rbo_ext(dup, ok, 0.7), Error);
}

TEST(DMetric, ComplementsRboAndStaysInUnitInterval) {
  MetricConfig cfg;
  rng::Stream s(41);
  for (int trial = 0; trial < 300; ++trial) {
    RankedList a = random_list(s, 14, 10);
    RankedList b = random_list(s, 14, 10);
    double d = metrics::d_metric(a, b, cfg, RboVariant::kExtrapolated);
    EXPECT_NEAR(d, 1.0 - metrics::rbo_ext(a, b, cfg.p), 1e-15);
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 1.0);
  }
  RankedList a = {"x", "y"};
  EXPECT_EQ(metrics::d_metric(a, a, cfg, RboVariant::kExtrapolated), 0.0);
}

TEST(PrefixWeight, PinnedAndMatchesSeries) {
  // Ten ranks at p=0.7 hold over 99% of the total weight.
  EXPECT_NEAR(metrics::prefix_weight(0.7, 10), 0.9936649742778212, 1e-15);
  EXPECT_GE(metrics::prefix_weight(0.7, 10), 0.99);
  EXPECT_LT(metrics::prefix_weight(0.7, 10), 1.0);
  EXPECT_NEAR(metrics::prefix_weight(0.1, 1), 0.9482446409204371, 1e-15);
  EXPECT_GT(metrics::prefix_weight(0.1, 10), 0.999999);
  for (double p : {0.3, 0.5, 0.7, 0.9, 0.98})
    for (int k : {1, 2, 5, 10, 50})
      EXPECT_NEAR(metrics::prefix_weight(p, k), oracles::prefix_weight(p, k),
                  1e-12);
}

TEST(PrefixWeight, MonotoneInDepth) {
  double prev = 0.0;
  for (int k = 1; k <= 30; ++k) {
    double w = metrics::prefix_weight(0.7, k);
    EXPECT_GT(w, prev);
    EXPECT_LT(w, 1.0);
    prev = w;
  }
}

TEST(EditDistance, MatchesDpOracle) {
  rng::Stream s(20260501);
  for (int trial = 0; trial < 500; ++trial) {
    RankedList a = random_list(s, 8, 10);
    RankedList b = random_list(s, 8, 10);
    EXPECT_EQ(metrics::edit_distance(a, b), oracles::edit_distance(a, b));
  }
  EXPECT_EQ(metrics::edit_distance({}, {"a", "b"}), 2);
  EXPECT_EQ(metrics::edit_distance({"a", "b"}, {}), 2);
  EXPECT_EQ(metrics::edit_distance({}, {}), 0);
}

TEST(SetMetrics, MatchSetAlgebraOracle) {
  rng::Stream s(77);
  for (int trial = 0; trial < 500; ++trial) {
    RankedList a = random_list(s, 18, 12);
    RankedList b = random_list(s, 18, 12);
    EXPECT_EQ(metrics::symdiff_top_k(a, b, 10),
              oracles::symdiff_top_k(a, b, 10));
    EXPECT_EQ(metrics::common_top_k(a, b, 3), oracles::common_top_k(a, b, 3));
  }
  RankedList a = {"a", "b", "c"};
  EXPECT_EQ(metrics::symdiff_top_k(a, a, 10), 0);
  EXPECT_EQ(metrics::common_top_k(a, a, 3), 3);
}

TEST(CategorySequence, NumbersRepeatsPerCategory) {
  std::vector<RankedResult> results;
  for (int i = 1; i <= 4; ++i) {
    RankedResult r;
    r.rank = i;
    r.url = "https://d" + std::to_string(i) + ".example/x";
    r.domain = "d" + std::to_string(i) + ".example";
    r.title = "t";
    results.push_back(r);
  }
  std::map<std::string, std::string> categories = {
      {"d1.example", "News"},
      {"d2.example", "Sports"},
      {"d3.example", "News"},
      {"d4.example", "News"},
  };
  std::vector<std::string> seq =
      metrics::to_category_sequence(results, categories);
  ASSERT_EQ(seq.size(), 4u);
  EXPECT_EQ(seq[0], "News#1");
  EXPECT_EQ(seq[1], "Sports#1");
  EXPECT_EQ(seq[2], "News#2");
  EXPECT_EQ(seq[3], "News#3");
}

TEST(CategorySequence, UnmappedDomainIsAnError) {
  RankedResult r;
  r.rank = 1;
  r.url = "https://mystery.example/x";
  r.domain = "mystery.example";
  r.title = "t";
  std::map<std::string, std::string> categories;
  try {
    metrics::to_category_sequence({r}, categories);
    FAIL() << "expected an error for the unmapped domain";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("mystery.example"),
              std::string::npos);
  }
}

}  // namespace
}  // namespace serpaudit
