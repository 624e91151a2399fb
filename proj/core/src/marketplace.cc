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

#include "ltr/marketplace.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <utility>

#include "json.hpp"
#include "ltr/errors.h"
#include "ltr/neural.h"
#include "ltr/random.h"

namespace ltr {

using nlohmann::json;

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

double sample_beta(std::mt19937_64& rng, double a, double b) {
  std::gamma_distribution<double> ga(a, 1.0);
  std::gamma_distribution<double> gb(b, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  return x / (x + y);
}

}  // namespace

void Query::validate() const {
  const Bounds& b = bounds;
  const bool in_range = b.x_min >= 0.0 && b.x_max <= 1.0 && b.y_min >= 0.0 &&
                        b.y_max <= 1.0;
  if (!in_range || !(b.x_min < b.x_max) || !(b.y_min < b.y_max)) {
    throw ValidationError("query bounds must satisfy 0 <= min < max <= 1");
  }
}

void Impression::validate() const {
  query.validate();
  if (candidates.empty()) throw ValidationError("impression has no candidates");
  if (booked_index < 0 || booked_index >= static_cast<int>(candidates.size())) {
    throw ValidationError("booked_index out of range");
  }
  if (trip_rating < 1 || trip_rating > 5) {
    throw ValidationError("trip_rating must be in {1..5}");
  }
  for (const Listing& l : candidates) {
    if (!query.bounds.contains(l.features[kLocationXFeature],
                               l.features[kLocationYFeature])) {
      throw ValidationError("candidate " + std::to_string(l.id) +
                            " lies outside the query bounds");
    }
  }
}

void ListingGeneratorConfig::validate() const {
  if (feature_width < kMinFeatureWidth) {
    throw ConfigError("feature width must be >= " + std::to_string(kMinFeatureWidth));
  }
  if (cluster_size < 1) throw ConfigError("cluster_size must be >= 1");
  if (quality_alpha <= 0.0 || quality_beta <= 0.0) {
    throw ConfigError("quality beta parameters must be positive");
  }
}

void ChoiceModelConfig::validate() const {
  if (!(temperature > 0.0)) throw ConfigError("temperature must be positive");
  if (similarity_penalty < 0.0) throw ConfigError("similarity_penalty must be >= 0");
  if (rating_noise < 0.0) throw ConfigError("rating_noise must be >= 0");
  if (!(similarity_bandwidth > 0.0)) throw ConfigError("bandwidth must be positive");
}

std::vector<double> default_utility_weights(int feature_width) {
  std::vector<double> w(static_cast<std::size_t>(feature_width), 0.0);
  w[kPriceFeature] = -3.0;
  w[kQualityFeature] = 2.5;
  static constexpr double kAmenity[] = {1.0, 0.6, -0.4, 0.3};
  for (int f = kFirstAmenityFeature; f < feature_width; ++f) {
    w[f] = kAmenity[(f - kFirstAmenityFeature) % 4];
  }
  return w;
}

std::vector<Listing> generate_listings(int count, int feature_width,
                                       std::uint64_t seed) {
  ListingGeneratorConfig config;
  config.feature_width = feature_width;
  return generate_listings(count, config, seed);
}

std::vector<Listing> generate_listings(int count,
                                       const ListingGeneratorConfig& config,
                                       std::uint64_t seed) {
  if (count < 1) throw ConfigError("listing count must be >= 1");
  config.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const int width = config.feature_width;
  const int amenities = width - kFirstAmenityFeature;

  std::vector<Listing> listings;
  listings.reserve(static_cast<std::size_t>(count));
  double cluster_price_z = 0.0;
  double cluster_x = 0.0;
  double cluster_y = 0.0;
  double cluster_quality = 0.0;
  std::vector<double> cluster_amenities(static_cast<std::size_t>(amenities));
  for (int i = 0; i < count; ++i) {
    if (i % config.cluster_size == 0) {
      cluster_price_z = normal(rng);
      cluster_x = uniform(rng);
      cluster_y = uniform(rng);
      cluster_quality = sample_beta(rng, config.quality_alpha, config.quality_beta);
      for (double& a : cluster_amenities) a = uniform(rng) < 0.5 ? 0.0 : 1.0;
    }
    Listing l;
    l.id = i;
    l.features.assign(static_cast<std::size_t>(width), 0.0);
    l.latent.cluster = i / config.cluster_size;
    l.features[kPriceFeature] =
        sigmoid(config.price_mu + config.price_cluster_sigma * cluster_price_z +
                config.price_within_sigma * normal(rng));
    l.features[kLocationXFeature] =
        clamp01(cluster_x + config.location_spread * normal(rng));
    l.features[kLocationYFeature] =
        clamp01(cluster_y + config.location_spread * normal(rng));
    l.latent.quality = clamp01(cluster_quality + config.quality_jitter * normal(rng));
    l.features[kQualityFeature] =
        clamp01(l.latent.quality + config.quality_observation_noise * normal(rng));
    for (int a = 0; a < amenities; ++a) {
      l.features[kFirstAmenityFeature + a] =
          clamp01(cluster_amenities[a] + config.amenity_jitter * normal(rng));
    }
    l.latent.appeal = config.appeal_sigma * normal(rng);
    listings.push_back(std::move(l));
  }
  return listings;
}

Query sample_query(const QuerySamplerConfig& config, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> extent(config.min_extent, config.max_extent);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Query q;
  const double wx = extent(rng);
  const double wy = extent(rng);
  q.bounds.x_min = uniform(rng) * (1.0 - wx);
  q.bounds.x_max = q.bounds.x_min + wx;
  q.bounds.y_min = uniform(rng) * (1.0 - wy);
  q.bounds.y_max = q.bounds.y_min + wy;
  q.features = {uniform(rng), uniform(rng)};
  q.seed = seed;
  return q;
}

double similarity_kernel(const Listing& a, const Listing& b, double bandwidth) {
  double d2 = 0.0;
  for (std::size_t f = 0; f < a.features.size(); ++f) {
    const double d = a.features[f] - b.features[f];
    d2 += d * d;
  }
  return std::exp(-d2 / bandwidth);
}

double base_utility(const Query& query, const Listing& listing,
                    const ChoiceModelConfig& config) {
  const std::vector<double> defaults =
      config.utility_weights.empty()
          ? default_utility_weights(static_cast<int>(listing.features.size()))
          : std::vector<double>{};
  const std::vector<double>& w =
      config.utility_weights.empty() ? defaults : config.utility_weights;
  if (w.size() != listing.features.size()) {
    throw ShapeError("utility weights do not match the feature width");
  }
  double u = listing.latent.appeal;
  for (std::size_t f = 0; f < w.size(); ++f) u += w[f] * listing.features[f];
  if (query.features.size() >= 2) {
    const double trip = query.features[0];
    const double guests = query.features[1];
    u += config.guests_amenity * guests * listing.features[kFirstAmenityFeature];
    u -= config.trip_price * trip * listing.features[kPriceFeature];
  }
  return u;
}

std::vector<double> context_utilities(const Query& query,
                                      const std::vector<Listing>& candidates,
                                      const ChoiceModelConfig& config) {
  config.validate();
  const std::size_t n = candidates.size();
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = base_utility(query, candidates[i], config);
  if (config.similarity_penalty == 0.0) return u;
  std::vector<double> discounted(n);
  for (std::size_t i = 0; i < n; ++i) {
    double penalty = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || u[j] <= u[i]) continue;
      penalty += similarity_kernel(candidates[i], candidates[j],
                                   config.similarity_bandwidth) *
                 (u[j] - u[i]);
    }
    discounted[i] = u[i] - config.similarity_penalty * penalty;
  }
  return discounted;
}

std::vector<double> choice_probabilities(const Query& query,
                                         const std::vector<Listing>& candidates,
                                         const ChoiceModelConfig& config) {
  if (candidates.empty()) throw ShapeError("choice over an empty candidate set");
  std::vector<double> u = context_utilities(query, candidates, config);
  for (double& v : u) v /= config.temperature;
  return softmax(u);
}

int ground_truth_choice(const Query& query, const std::vector<Listing>& candidates,
                        const ChoiceModelConfig& config, std::uint64_t rng_seed) {
  const std::vector<double> p = choice_probabilities(query, candidates, config);
  std::mt19937_64 rng(rng_seed);
  const double r = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double cumulative = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    cumulative += p[i];
    if (r < cumulative) return static_cast<int>(i);
  }
  return static_cast<int>(p.size()) - 1;
}

int assign_trip_rating(const Listing& booked, std::uint64_t rng_seed,
                       double rating_noise) {
  double noise = 0.0;
  if (rating_noise > 0.0) {
    std::mt19937_64 rng(rng_seed);
    noise = std::normal_distribution<double>(0.0, rating_noise)(rng);
  }
  const double raw = std::round(1.0 + 4.0 * booked.latent.quality + noise);
  return static_cast<int>(std::clamp(raw, 1.0, 5.0));
}

double expected_trip_rating(const Listing& listing) {
  return 1.0 + 4.0 * listing.latent.quality;
}

std::optional<std::vector<Listing>> retrieve_candidates(
    const Query& query, const std::vector<Listing>& pool, int count) {
  std::vector<std::pair<std::uint64_t, std::size_t>> ranked;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const Listing& l = pool[i];
    if (query.bounds.contains(l.features[kLocationXFeature],
                              l.features[kLocationYFeature])) {
      ranked.emplace_back(mix_seed(query.seed, static_cast<std::uint64_t>(l.id)), i);
    }
  }
  if (static_cast<int>(ranked.size()) < count) return std::nullopt;
  std::partial_sort(ranked.begin(), ranked.begin() + count, ranked.end());
  std::vector<Listing> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) out.push_back(pool[ranked[k].second]);
  return out;
}

SearchLog generate_search_log(int num_impressions, int candidates_per_impression,
                              const std::vector<Listing>& listing_pool,
                              const ChoiceModelConfig& config, std::uint64_t seed,
                              const QuerySamplerConfig& sampler) {
  config.validate();
  if (candidates_per_impression < 1) {
    throw ConfigError("candidates_per_impression must be >= 1");
  }
  if (candidates_per_impression > static_cast<int>(listing_pool.size())) {
    throw ConfigError("candidates_per_impression exceeds the listing pool");
  }
  SearchLog log;
  for (int k = 0; k < num_impressions; ++k) {
    const std::uint64_t s = mix_seed(seed, static_cast<std::uint64_t>(k));
    Query query = sample_query(sampler, mix_seed(s, 0));
    auto candidates = retrieve_candidates(query, listing_pool, candidates_per_impression);
    if (!candidates) {
      ++log.skipped;
      continue;
    }
    Impression imp;
    imp.query = std::move(query);
    imp.candidates = std::move(*candidates);
    imp.booked_index = ground_truth_choice(imp.query, imp.candidates, config, mix_seed(s, 1));
    imp.trip_rating = assign_trip_rating(imp.candidates[imp.booked_index],
                                         mix_seed(s, 2), config.rating_noise);
    log.impressions.push_back(std::move(imp));
  }
  if (num_impressions > 0 && log.impressions.empty()) {
    throw GenerationError("all " + std::to_string(num_impressions) +
                          " impressions were skipped: too few in-bounds listings");
  }
  return log;
}

Query jitter_query(const Query& query, double magnitude, std::uint64_t seed) {
  if (magnitude < 0.0) throw NumericError("jitter magnitude must be >= 0");
  if (magnitude == 0.0) return query;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> shift(-magnitude, magnitude);
  Query out = query;
  out.bounds.x_min = clamp01(query.bounds.x_min + shift(rng));
  out.bounds.x_max = clamp01(query.bounds.x_max + shift(rng));
  out.bounds.y_min = clamp01(query.bounds.y_min + shift(rng));
  out.bounds.y_max = clamp01(query.bounds.y_max + shift(rng));
  if (!(out.bounds.x_min < out.bounds.x_max) || !(out.bounds.y_min < out.bounds.y_max)) {
    throw NumericError("jitter inverted the query bounds");
  }
  return out;
}

std::string impression_to_json_line(const Impression& imp) {
  json candidates = json::array();
  for (const Listing& l : imp.candidates) {
    candidates.push_back({{"id", l.id}, {"features", l.features}});
  }
  const Bounds& b = imp.query.bounds;
  json j = {
      {"query",
       {{"bounds", {b.x_min, b.x_max, b.y_min, b.y_max}},
        {"features", imp.query.features},
        {"seed", imp.query.seed}}},
      {"candidates", std::move(candidates)},
      {"booked_index", imp.booked_index},
      {"trip_rating", imp.trip_rating},
  };
  return j.dump();
}

Impression impression_from_json_line(const std::string& line, long line_number) {
  try {
    const json j = json::parse(line);
    Impression imp;
    const json& q = j.at("query");
    const auto bounds = q.at("bounds").get<std::vector<double>>();
    if (bounds.size() != 4) throw ValidationError("bounds must have 4 entries");
    imp.query.bounds = {bounds[0], bounds[1], bounds[2], bounds[3]};
    imp.query.features = q.at("features").get<std::vector<double>>();
    imp.query.seed = q.at("seed").get<std::uint64_t>();
    for (const json& c : j.at("candidates")) {
      Listing l;
      l.id = c.at("id").get<std::int64_t>();
      l.features = c.at("features").get<std::vector<double>>();
      imp.candidates.push_back(std::move(l));
    }
    imp.booked_index = j.at("booked_index").get<int>();
    imp.trip_rating = j.at("trip_rating").get<int>();
    imp.validate();
    return imp;
  } catch (const json::exception& e) {
    throw ParseError("line " + std::to_string(line_number) + ": " + e.what(),
                     line_number);
  } catch (const ValidationError& e) {
    throw ParseError("line " + std::to_string(line_number) + ": " + e.what(),
                     line_number);
  }
}

void save_log(const std::vector<Impression>& log, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  for (const Impression& imp : log) out << impression_to_json_line(imp) << '\n';
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::vector<Impression> load_log(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::vector<Impression> log;
  std::string line;
  long line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    log.push_back(impression_from_json_line(line, line_number));
  }
  return log;
}

}  // namespace ltr
