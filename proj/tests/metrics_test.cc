// Copyright 2026 The ltr Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "ltr/errors.h"
#include "ltr/metrics.h"

namespace ltr {
namespace {

std::vector<std::size_t> identity(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

double population_variance(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size());
}

TEST(NdcgTest, KnownPositions) {
  EXPECT_EQ(ndcg({identity(5), 0, {}}), 1.0);
  EXPECT_NEAR(ndcg({identity(5), 1, {}}), 1.0 / std::log2(3.0), 1e-15);
  EXPECT_NEAR(ndcg({identity(5), 1, {}}), 0.6309297535714575, 1e-15);
  EXPECT_NEAR(ndcg({identity(5), 4, {}}), 1.0 / std::log2(6.0), 1e-15);
}

TEST(NdcgTest, CutoffZeroesDeepBookings) {
  EXPECT_EQ(ndcg({identity(5), 3, {}}, 3), 0.0);
  EXPECT_NEAR(ndcg({identity(5), 2, {}}, 3), 0.5, 1e-15);
}

TEST(NdcgTest, MeanMatchesIndependentDcg) {
  std::mt19937_64 rng(1);
  double total = 0.0, oracle = 0.0;
  for (int t = 0; t < 300; ++t) {
    auto order = identity(10);
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t booked = static_cast<std::size_t>(t % 10);
    total += ndcg({order, booked, {}});
    // DCG over relevance vector / ideal DCG (= 1 with one relevant item).
    double dcg = 0.0;
    for (std::size_t r = 0; r < order.size(); ++r) {
      const double rel = order[r] == booked ? 1.0 : 0.0;
      dcg += (std::pow(2.0, rel) - 1.0) / std::log2(static_cast<double>(r) + 2.0);
    }
    oracle += dcg;
  }
  EXPECT_NEAR(total / 300.0, oracle / 300.0, 1e-12);
}

TEST(NdcgTest, InRangeAndOneOnlyWhenFirst) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 200; ++t) {
    auto order = identity(8);
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t booked = order[static_cast<std::size_t>(t % 8)];
    const double v = ndcg({order, booked, {}});
    EXPECT_GT(v, 0.0);
    EXPECT_LE(v, 1.0);
    EXPECT_EQ(v == 1.0, order[0] == booked);
    // Relabel the not-booked listings among themselves.
    auto relabeled = order;
    std::vector<std::size_t> others;
    for (std::size_t& c : relabeled) {
      if (c != booked) others.push_back(c);
    }
    std::shuffle(others.begin(), others.end(), rng);
    std::size_t k = 0;
    for (std::size_t& c : relabeled) {
      if (c != booked) c = others[k++];
    }
    EXPECT_EQ(ndcg({relabeled, booked, {}}), v);
  }
}

TEST(NdcgTest, RejectsInvalidOrderings) {
  EXPECT_THROW(ndcg({{0, 1, 1}, 0, {}}), ValidationError);
  EXPECT_THROW(ndcg({{0, 1, 2}, 5, {}}), ValidationError);
  EXPECT_THROW(ndcg({{0, 3}, 0, {}}), ValidationError);
}

TEST(DiversityTest, KnownValues) {
  const std::vector<double> equal(6, 0.4);
  EXPECT_EQ(price_variance_diversity(equal, 3), 0.0);
  const std::vector<double> prices = {0.9, 0.1, 0.5, 0.3, 0.7, 0.2, 0.8, 0.4, 0.6, 0.35};
  EXPECT_NEAR(price_variance_diversity(prices, prices.size()), 1.0, 1e-12);
  // Top 5: {0.9, 0.1, 0.5, 0.3, 0.7}: mean 0.5, variance 0.08.
  const double all = population_variance(prices);
  EXPECT_NEAR(price_variance_diversity(prices, 5), 0.08 / all, 1e-12);
  EXPECT_EQ(price_variance_diversity(prices, 1), 0.0);
  EXPECT_THROW(price_variance_diversity(prices, 0), ValidationError);
  EXPECT_THROW(price_variance_diversity(prices, 11), ValidationError);
}

TEST(DiversityTest, ScaleInvariant) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> p(12);
    for (double& x : p) x = u(rng);
    std::vector<double> scaled = p;
    for (double& x : scaled) x *= 37.5;
    EXPECT_NEAR(price_variance_diversity(p, 5), price_variance_diversity(scaled, 5), 1e-12);
  }
}

TEST(DiversityTest, RankedPricesFollowDisplayOrder) {
  const RankedImpression ri{{2, 0, 1}, 0, {10.0, 20.0, 30.0}};
  EXPECT_EQ(ranked_prices(ri), (std::vector<double>{30.0, 10.0, 20.0}));
}

TEST(FlipsTest, Definitional) {
  const std::vector<std::int64_t> a = {1, 2, 3, 4, 5, 6, 7, 8};
  EXPECT_EQ(count_flips(a, a, 4), 0u);
  const std::vector<std::int64_t> swapped = {5, 6, 7, 8, 1, 2, 3, 4};
  EXPECT_EQ(count_flips(a, swapped, 4), 4u);
  // A newly retrieved id (99) is availability churn, not a flip.
  const std::vector<std::int64_t> churned = {99, 1, 2, 3, 5, 6, 7, 8};
  EXPECT_EQ(count_flips(a, churned, 4), 0u);
  EXPECT_THROW(count_flips(a, a, 9), ValidationError);
}

TEST(FlipsTest, MatchesSetDifferenceOracle) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 300; ++t) {
    std::vector<std::int64_t> pool(14);
    std::iota(pool.begin(), pool.end(), 100);
    std::shuffle(pool.begin(), pool.end(), rng);
    const std::vector<std::int64_t> original(pool.begin(), pool.begin() + 10);
    std::vector<std::int64_t> jittered(pool.begin() + 2, pool.end());
    std::shuffle(jittered.begin(), jittered.end(), rng);
    const std::size_t k = 1 + static_cast<std::size_t>(t % 10);
    const std::set<std::int64_t> in_original(original.begin(), original.end());
    const std::set<std::int64_t> top(original.begin(), original.begin() + k);
    std::size_t expected = 0;
    for (std::size_t r = 0; r < k; ++r) {
      const auto id = jittered[r];
      expected += in_original.count(id) && !top.count(id);
    }
    const std::size_t flips = count_flips(original, jittered, k);
    EXPECT_EQ(flips, expected);
    EXPECT_LE(flips, k);
  }
}

TEST(SummaryTest, MeanAndSampleStddev) {
  const std::vector<double> v = {2, 4, 4, 4, 5, 5, 7, 9};
  EXPECT_EQ(mean(v), 5.0);
  EXPECT_NEAR(stddev(v), std::sqrt(32.0 / 7.0), 1e-15);
  EXPECT_EQ(stddev(std::vector<double>{3.0}), 0.0);
}

}  // namespace
}  // namespace ltr
