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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "ltr/errors.h"
#include "ltr/marketplace.h"
#include "ltr/neural.h"
#include "ltr/random.h"
#include "testing.h"

namespace ltr {
namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("ltr_marketplace_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

TEST(GenerateListingsTest, DeterministicInSeed) {
  const auto a = generate_listings(5, kDefaultFeatureWidth, 1);
  const auto b = generate_listings(5, kDefaultFeatureWidth, 1);
  ASSERT_EQ(a.size(), 5u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i], b[i]);
    EXPECT_EQ(a[i].latent.quality, b[i].latent.quality);
  }
  EXPECT_NE(generate_listings(5, kDefaultFeatureWidth, 2)[0], a[0]);
}

TEST(GenerateListingsTest, FeaturesWithinDocumentedRanges) {
  const auto listings = generate_listings(1000, kDefaultFeatureWidth, 2);
  for (const Listing& l : listings) {
    ASSERT_EQ(l.features.size(), static_cast<std::size_t>(kDefaultFeatureWidth));
    EXPECT_GT(l.price(), 0.0);
    EXPECT_LT(l.price(), 1.0);
    for (double f : l.features) {
      EXPECT_GE(f, 0.0);
      EXPECT_LE(f, 1.0);
    }
    EXPECT_GE(l.latent.quality, 0.0);
    EXPECT_LE(l.latent.quality, 1.0);
  }
}

TEST(GenerateListingsTest, PriceMeanMatchesLogitNormalMoments) {
  // Unclustered, price = sigmoid(Z) with Z ~ N(0, s^2): the mean is 1/2 by
  // symmetry and the variance comes from quadrature over the normal density.
  ListingGeneratorConfig config;
  config.cluster_size = 1;
  const double s = std::hypot(config.price_cluster_sigma, config.price_within_sigma);
  double second = 0.0;
  const int steps = 20000;
  const double lo = -10.0, hi = 10.0, h = (hi - lo) / steps;
  for (int k = 0; k <= steps; ++k) {
    const double z = lo + k * h;
    const double w = (k == 0 || k == steps) ? 0.5 : 1.0;
    const double p = sigmoid(s * z) - 0.5;
    second += w * p * p * std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI) * h;
  }
  const auto listings = generate_listings(100, config, 3);
  double total = 0.0;
  for (const Listing& l : listings) total += l.price();
  const double sample_mean = total / 100.0;
  EXPECT_LT(std::abs(sample_mean - 0.5), 3.0 * std::sqrt(second / 100.0));
}

TEST(GenerateListingsTest, RejectsBadConfig) {
  EXPECT_THROW(generate_listings(0, kDefaultFeatureWidth, 1), ConfigError);
  EXPECT_THROW(generate_listings(5, kMinFeatureWidth - 1, 1), ConfigError);
  ListingGeneratorConfig config;
  config.cluster_size = 0;
  EXPECT_THROW(generate_listings(5, config, 1), ConfigError);
}

TEST(GenerateListingsTest, ClustersShareAmenitiesAndLocation) {
  ListingGeneratorConfig config;
  config.cluster_size = 4;
  const auto listings = generate_listings(8, config, 5);
  for (int i = 1; i < 4; ++i) {
    EXPECT_EQ(listings[i].latent.cluster, 0);
    EXPECT_NEAR(listings[i].features[kLocationXFeature],
                listings[0].features[kLocationXFeature], 0.1);
    EXPECT_NEAR(listings[i].features[kFirstAmenityFeature],
                listings[0].features[kFirstAmenityFeature], 0.3);
  }
  EXPECT_EQ(listings[4].latent.cluster, 1);
}

TEST(ChoiceModelTest, ContextUtilitiesMatchHandComputation) {
  ChoiceModelConfig config;
  config.utility_weights = {1.0, 0.0, 0.0, 0.0, 0.0};
  config.similarity_penalty = 2.0;
  config.similarity_bandwidth = 0.5;
  Query q;  // no query features, so no interaction term
  std::vector<Listing> c = {{0, {0.2, 0, 0, 0, 0}, {}}, {1, {0.5, 0, 0, 0, 0}, {}},
                            {2, {0.9, 0, 0, 0, 0}, {}}};
  const auto u = context_utilities(q, c, config);
  auto sim = [](double d) { return std::exp(-d * d / 0.5); };
  EXPECT_NEAR(u[0], 0.2 - 2.0 * (sim(0.3) * 0.3 + sim(0.7) * 0.7), 1e-15);
  EXPECT_NEAR(u[1], 0.5 - 2.0 * (sim(0.4) * 0.4), 1e-15);
  EXPECT_EQ(u[2], 0.9);
}

TEST(ChoiceModelTest, BaseUtilityIncludesQueryInteraction) {
  ChoiceModelConfig config;
  Listing l{0, {0.4, 0.1, 0.2, 0.6, 1.0}, {0.5, 0.25, 0}};
  Query q;
  q.features = {0.5, 0.8};
  const auto w = default_utility_weights(kMinFeatureWidth);
  const double expected = 0.25 + w[0] * 0.4 + w[3] * 0.6 + w[4] * 1.0 +
                          config.guests_amenity * 0.8 * 1.0 -
                          config.trip_price * 0.5 * 0.4;
  EXPECT_NEAR(base_utility(q, l, config), expected, 1e-15);
}

TEST(ChoiceModelTest, DominantCandidateAtLowTemperature) {
  ChoiceModelConfig config;
  config.similarity_penalty = 0.0;
  config.temperature = 0.01;
  std::mt19937_64 rng(4);
  auto c = testing::random_listings(rng, 4, kMinFeatureWidth);
  c[2].latent.appeal = 5.0;
  Query q;
  q.features = {0.5, 0.5};
  int hits = 0;
  for (int k = 0; k < 1000; ++k) hits += ground_truth_choice(q, c, config, mix_seed(8, k)) == 2;
  EXPECT_GT(hits / 1000.0, 0.99);
}

TEST(ChoiceModelTest, IdenticalCandidatesSplitEvenly) {
  ChoiceModelConfig config;
  config.similarity_penalty = 0.0;
  std::mt19937_64 rng(5);
  const Listing l = testing::random_listing(rng, kMinFeatureWidth, 0);
  const std::vector<Listing> c = {l, l};
  Query q;
  q.features = {0.3, 0.3};
  int first = 0;
  for (int k = 0; k < 1000; ++k) first += ground_truth_choice(q, c, config, mix_seed(9, k)) == 0;
  EXPECT_NEAR(first / 1000.0, 0.5, 0.05);
}

TEST(ChoiceModelTest, ZeroPenaltyIsMultinomialLogit) {
  ChoiceModelConfig config;
  config.similarity_penalty = 0.0;
  config.temperature = 0.7;
  std::mt19937_64 rng(6);
  const auto c = testing::random_listings(rng, 5, kDefaultFeatureWidth);
  Query q;
  q.features = {0.2, 0.9};
  std::vector<double> u;
  for (const Listing& l : c) u.push_back(base_utility(q, l, config) / config.temperature);
  const auto expected = softmax(u);
  std::vector<int> counts(c.size(), 0);
  const int draws = 50000;
  for (int k = 0; k < draws; ++k) ++counts[ground_truth_choice(q, c, config, mix_seed(10, k))];
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_NEAR(counts[i] / static_cast<double>(draws), expected[i], 0.02);
  }
}

TEST(ChoiceModelTest, PenaltyBreaksIndependenceOfIrrelevantAlternatives) {
  ChoiceModelConfig config;
  config.similarity_penalty = 6.0;
  const auto s = testing::twin_shares(config, 10000, 12);
  EXPECT_LT(s.p_y_with_x + 3.0 * s.p_y_se, s.p_y_without_x);
  // Without context effects y's share against z would not depend on x.
  EXPECT_LT(s.y_share_of_yz_with_x + 3.0 * s.share_se, s.y_share_without_x);
}

TEST(ChoiceModelTest, ZeroPenaltyRespectsIndependenceOfIrrelevantAlternatives) {
  ChoiceModelConfig config;
  config.similarity_penalty = 0.0;
  const auto s = testing::twin_shares(config, 10000, 12);
  EXPECT_LT(std::abs(s.y_share_of_yz_with_x - s.y_share_without_x), 3.0 * s.share_se);
}

TEST(ChoiceModelTest, RejectsBadInputs) {
  ChoiceModelConfig config;
  Query q;
  EXPECT_THROW(choice_probabilities(q, {}, config), ShapeError);
  config.temperature = 0.0;
  std::mt19937_64 rng(1);
  EXPECT_THROW(choice_probabilities(q, testing::random_listings(rng, 2, 5), config),
               ConfigError);
}

TEST(TripRatingTest, NoiselessExtremes) {
  Listing best{0, {}, {1.0, 0, 0}};
  Listing worst{1, {}, {0.0, 0, 0}};
  EXPECT_EQ(assign_trip_rating(best, 1, 0.0), 5);
  EXPECT_EQ(assign_trip_rating(worst, 1, 0.0), 1);
  EXPECT_DOUBLE_EQ(expected_trip_rating(best), 5.0);
}

TEST(TripRatingTest, MeanMatchesDiscretizedNormal) {
  const double quality = 0.6, noise = 0.5, centre = 1.0 + 4.0 * quality;
  double expected = 0.0;
  for (int k = 1; k <= 5; ++k) {
    const double upper = k == 5 ? 1.0 : normal_cdf((k + 0.5 - centre) / noise);
    const double lower = k == 1 ? 0.0 : normal_cdf((k - 0.5 - centre) / noise);
    expected += k * (upper - lower);
  }
  Listing l{0, {}, {quality, 0, 0}};
  double total = 0.0;
  for (int k = 0; k < 10000; ++k) total += assign_trip_rating(l, mix_seed(3, k), noise);
  EXPECT_NEAR(total / 10000.0, expected, 0.1);
  EXPECT_EQ(assign_trip_rating(l, 77, noise), assign_trip_rating(l, 77, noise));
}

TEST(SearchLogTest, ImpressionsSatisfyInvariants) {
  const auto pool = generate_listings(600, kDefaultFeatureWidth, 1);
  const auto log = generate_search_log(200, 20, pool, {}, 4);
  EXPECT_EQ(log.impressions.size() + static_cast<std::size_t>(log.skipped), 200u);
  for (const Impression& imp : log.impressions) {
    EXPECT_NO_THROW(imp.validate());
    EXPECT_EQ(imp.candidates.size(), 20u);
    std::set<std::int64_t> ids;
    for (const Listing& l : imp.candidates) ids.insert(l.id);
    EXPECT_EQ(ids.size(), 20u);
  }
}

TEST(SearchLogTest, EmptyAndImpossibleRequests) {
  const auto pool = generate_listings(50, kDefaultFeatureWidth, 1);
  EXPECT_TRUE(generate_search_log(0, 5, pool, {}, 1).impressions.empty());
  EXPECT_THROW(generate_search_log(5, 51, pool, {}, 1), ConfigError);
  EXPECT_THROW(generate_search_log(5, 50, pool, {}, 1), GenerationError);
}

TEST(SearchLogTest, SavedLogsAreByteIdentical) {
  const auto pool = generate_listings(600, kDefaultFeatureWidth, 11);
  const std::string a = temp_path("a.jsonl"), b = temp_path("b.jsonl");
  save_log(generate_search_log(5000, 20, pool, {}, 11).impressions, a);
  save_log(generate_search_log(5000, 20, pool, {}, 11).impressions, b);
  EXPECT_EQ(slurp(a), slurp(b));
  std::filesystem::remove(a);
  std::filesystem::remove(b);
}

TEST(SearchLogTest, RoundTripPreservesObservableFields) {
  const auto pool = generate_listings(600, kDefaultFeatureWidth, 2);
  const auto log = generate_search_log(100, 20, pool, {}, 3).impressions;
  const std::string path = temp_path("rt.jsonl");
  save_log(log, path);
  const auto loaded = load_log(path);
  ASSERT_EQ(loaded.size(), log.size());
  for (std::size_t i = 0; i < log.size(); ++i) {
    EXPECT_EQ(loaded[i], log[i]);
    EXPECT_EQ(loaded[i].candidates[0].latent.quality, 0.0) << "latent fields must not leak";
  }
  EXPECT_EQ(slurp(path).find("quality"), std::string::npos);
  save_log({}, path);
  EXPECT_TRUE(slurp(path).empty());
  EXPECT_TRUE(load_log(path).empty());
  std::filesystem::remove(path);
}

TEST(SearchLogTest, TruncatedLineNamesTheLine) {
  const auto pool = generate_listings(600, kDefaultFeatureWidth, 2);
  const auto log = generate_search_log(3, 20, pool, {}, 3).impressions;
  const std::string path = temp_path("trunc.jsonl");
  save_log(log, path);
  std::string text = slurp(path);
  text.resize(text.size() - 20);
  std::ofstream(path, std::ios::binary | std::ios::trunc) << text;
  try {
    load_log(path);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
    EXPECT_NE(std::string(e.what()).find('3'), std::string::npos);
  }
  std::filesystem::remove(path);
  EXPECT_THROW(load_log(temp_path("missing.jsonl")), IoError);
}

TEST(JitterTest, ZeroMagnitudeIsIdentity) {
  const Query q = sample_query({}, 5);
  EXPECT_EQ(jitter_query(q, 0.0, 1), q);
  EXPECT_THROW(jitter_query(q, -0.1, 1), NumericError);
}

TEST(JitterTest, BoundsMoveByAtMostMagnitude) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const Query q = sample_query({}, s);
    const Query j = jitter_query(q, 0.01, s + 1000);
    EXPECT_LE(std::abs(j.bounds.x_min - q.bounds.x_min), 0.01);
    EXPECT_LE(std::abs(j.bounds.x_max - q.bounds.x_max), 0.01);
    EXPECT_LE(std::abs(j.bounds.y_min - q.bounds.y_min), 0.01);
    EXPECT_LE(std::abs(j.bounds.y_max - q.bounds.y_max), 0.01);
    EXPECT_EQ(j.features, q.features);
  }
}

TEST(JitterTest, CandidateChurnIsSmall) {
  // Measured on the default generator: mean symmetric difference of about
  // 12% of N. Frozen as 0 < churn < 20%.
  const auto pool = generate_listings(600, kDefaultFeatureWidth, 1);
  double churn = 0.0;
  int trials = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const Query q = sample_query({}, s);
    const auto a = retrieve_candidates(q, pool, 20);
    const auto b = retrieve_candidates(jitter_query(q, 0.01, s + 1), pool, 20);
    if (!a || !b) continue;
    std::set<std::int64_t> ia, ib;
    for (const Listing& l : *a) ia.insert(l.id);
    for (const Listing& l : *b) ib.insert(l.id);
    int sym = 0;
    for (auto id : ia) sym += !ib.count(id);
    for (auto id : ib) sym += !ia.count(id);
    churn += sym / 20.0;
    ++trials;
  }
  ASSERT_GT(trials, 150);
  churn /= trials;
  EXPECT_GT(churn, 0.0);
  EXPECT_LT(churn, 0.2);
}

TEST(RetrievalTest, ReturnsInBoundsListingsOrNullopt) {
  const auto pool = generate_listings(600, kDefaultFeatureWidth, 3);
  const Query q = sample_query({}, 9);
  const auto c = retrieve_candidates(q, pool, 20);
  ASSERT_TRUE(c.has_value());
  for (const Listing& l : *c) {
    EXPECT_TRUE(q.bounds.contains(l.features[kLocationXFeature], l.features[kLocationYFeature]));
  }
  EXPECT_FALSE(retrieve_candidates(q, pool, 601).has_value());
}

}  // namespace
}  // namespace ltr
