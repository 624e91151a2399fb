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

// Synthetic marketplace: listings, queries, a context-dependent choice
// model and the search logs it produces.
//
// Listing feature layout (all values normalized):
//   [0] price       sigmoid of a log-normal draw, in (0, 1)
//   [1] location_x  in [0, 1]
//   [2] location_y  in [0, 1]
//   [3] quality     noisy observation of the latent quality, in [0, 1]
//   [4..F) amenity signals, in [0, 1]
//
// Listings are generated in clusters ("buildings"): members share location,
// amenities and price level and differ by small perturbations. Clusters are
// what make near-duplicate comparisons common in a candidate set.

#ifndef LTR_MARKETPLACE_H_
#define LTR_MARKETPLACE_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ltr {

inline constexpr int kPriceFeature = 0;
inline constexpr int kLocationXFeature = 1;
inline constexpr int kLocationYFeature = 2;
inline constexpr int kQualityFeature = 3;
inline constexpr int kFirstAmenityFeature = 4;
inline constexpr int kMinFeatureWidth = 5;
inline constexpr int kDefaultFeatureWidth = 8;
// [normalized trip length, guests]
inline constexpr int kQueryFeatureWidth = 2;

// Simulator-only ground truth; never part of a model input or a log file.
struct LatentAttributes {
  double quality = 0.0;
  double appeal = 0.0;
  int cluster = 0;
};

struct Listing {
  std::int64_t id = 0;
  std::vector<double> features;
  LatentAttributes latent;

  double price() const { return features[kPriceFeature]; }

  // Compares observable fields only (id, features).
  bool operator==(const Listing& other) const {
    return id == other.id && features == other.features;
  }
};

struct Bounds {
  double x_min = 0.0;
  double x_max = 1.0;
  double y_min = 0.0;
  double y_max = 1.0;

  bool contains(double x, double y) const {
    return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
  }
  bool operator==(const Bounds&) const = default;
};

struct Query {
  Bounds bounds;
  std::vector<double> features;
  std::uint64_t seed = 0;

  // Throws ValidationError on inverted or out-of-range bounds.
  void validate() const;
  bool operator==(const Query&) const = default;
};

struct Impression {
  Query query;
  std::vector<Listing> candidates;
  int booked_index = 0;
  int trip_rating = 3;

  // In-bounds candidates, a booking index in range, a rating in {1..5}.
  void validate() const;
  bool operator==(const Impression&) const = default;
};

struct ListingGeneratorConfig {
  int feature_width = kDefaultFeatureWidth;
  int cluster_size = 20;
  // price = sigmoid(price_mu + cluster_sigma * z_c + within_sigma * z_i)
  double price_mu = 0.0;
  double price_cluster_sigma = 0.8;
  double price_within_sigma = 0.15;
  double location_spread = 0.01;
  // Cluster quality ~ Beta(a, b); listing latent quality adds N(0, jitter).
  double quality_alpha = 2.0;
  double quality_beta = 2.0;
  double quality_jitter = 0.05;
  // Observed quality = latent quality + N(0, observation_noise), clamped.
  double quality_observation_noise = 0.1;
  double amenity_jitter = 0.05;
  double appeal_sigma = 0.05;

  void validate() const;
};

struct ChoiceModelConfig {
  // Over features; empty means default_utility_weights(feature_width).
  std::vector<double> utility_weights;
  // lambda: weight of the similarity-discounted context term.
  double similarity_penalty = 6.0;
  double temperature = 1.0;
  double rating_noise = 0.5;
  double similarity_bandwidth = 0.5;
  // Query interaction: + guests_amenity * guests * amenity_0
  //                    - trip_price * trip_length * price
  double guests_amenity = 1.5;
  double trip_price = 1.5;

  void validate() const;
};

std::vector<double> default_utility_weights(int feature_width);

struct QuerySamplerConfig {
  double min_extent = 0.25;
  double max_extent = 0.35;
};

// Throws ConfigError when count < 1 or feature_width < kMinFeatureWidth.
std::vector<Listing> generate_listings(int count, int feature_width,
                                       std::uint64_t seed);
std::vector<Listing> generate_listings(int count,
                                       const ListingGeneratorConfig& config,
                                       std::uint64_t seed);

Query sample_query(const QuerySamplerConfig& config, std::uint64_t seed);

// exp(-||a - b||^2 / bandwidth) over observable features.
double similarity_kernel(const Listing& a, const Listing& b, double bandwidth);

// u = w . features + appeal + query interaction.
double base_utility(const Query& query, const Listing& listing,
                    const ChoiceModelConfig& config);

// u'_i = u_i - lambda * sum_{j != i} sim(i, j) * max(0, u_j - u_i)
std::vector<double> context_utilities(const Query& query,
                                      const std::vector<Listing>& candidates,
                                      const ChoiceModelConfig& config);

// softmax(u' / temperature). Throws ShapeError on empty candidates.
std::vector<double> choice_probabilities(const Query& query,
                                         const std::vector<Listing>& candidates,
                                         const ChoiceModelConfig& config);

// Samples the booked index from choice_probabilities.
int ground_truth_choice(const Query& query, const std::vector<Listing>& candidates,
                        const ChoiceModelConfig& config, std::uint64_t rng_seed);

// clamp(round(1 + 4 * latent_quality + N(0, rating_noise)), 1, 5)
int assign_trip_rating(const Listing& booked, std::uint64_t rng_seed,
                       double rating_noise);
// Noise-free expected position on the 1..5 scale: 1 + 4 * latent_quality.
double expected_trip_rating(const Listing& listing);

// The `count` in-bounds listings with the smallest mix_seed(query.seed, id)
// priority, in priority order. Priority depends only on (query seed, id), so
// a jittered query keeps most of its candidates. nullopt when fewer than
// `count` listings are in bounds.
std::optional<std::vector<Listing>> retrieve_candidates(
    const Query& query, const std::vector<Listing>& pool, int count);

struct SearchLog {
  std::vector<Impression> impressions;
  // Impressions skipped for lack of in-bounds listings.
  int skipped = 0;
};

// Deterministic in seed; impression k uses mix_seed(seed, k). Throws
// ConfigError if candidates_per_impression exceeds the pool and
// GenerationError if every requested impression was skipped.
SearchLog generate_search_log(int num_impressions, int candidates_per_impression,
                              const std::vector<Listing>& listing_pool,
                              const ChoiceModelConfig& config, std::uint64_t seed,
                              const QuerySamplerConfig& sampler = {});

// Each bound moves by U(-magnitude, magnitude) and is clamped to [0, 1].
// Throws NumericError if a clamped pair ends up inverted.
Query jitter_query(const Query& query, double magnitude, std::uint64_t seed);

// Newline-delimited JSON, one impression per line; latent fields excluded.
void save_log(const std::vector<Impression>& log, const std::string& path);
// Throws ParseError naming the 1-based line of the first malformed record.
std::vector<Impression> load_log(const std::string& path);

std::string impression_to_json_line(const Impression& impression);
Impression impression_from_json_line(const std::string& line, long line_number);

}  // namespace ltr

#endif  // LTR_MARKETPLACE_H_
