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

// Ranking quality, diversity and stability metrics.

#ifndef LTR_METRICS_H_
#define LTR_METRICS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ltr {

struct RankedImpression {
  // ordering[r] is the candidate index shown at rank r (0-based).
  std::vector<std::size_t> ordering;
  std::size_t booked_index = 0;
  // Candidate prices indexed by candidate, not by rank.
  std::vector<double> prices;
};

// Binary relevance (booked = 1): 1 / log2(1 + position), position 1-based.
// With cutoff > 0, a booking ranked below the cutoff scores 0.
// Throws ValidationError if ordering is not a permutation or misses the
// booked index.
double ndcg(const RankedImpression& ri, std::size_t cutoff = 0);

// Population variance of the first page_size prices over the population
// variance of all of them (0 when every price is equal). ranked_prices are
// in display order. Throws ValidationError if page_size is 0 or > size.
double price_variance_diversity(std::span<const double> ranked_prices,
                                std::size_t page_size);
// Prices of `ri` in display order.
std::vector<double> ranked_prices(const RankedImpression& ri);

// Ids in jittered top-k that were outside the original top-k, counting only
// ids present in the original ranking. Rankings are full display orders of
// listing ids. Throws ValidationError if k exceeds either ranking.
std::size_t count_flips(std::span<const std::int64_t> original_ranking,
                        std::span<const std::int64_t> jittered_ranking,
                        std::size_t k);

double mean(std::span<const double> values);
// Sample standard deviation (n - 1); 0 for fewer than two values.
double stddev(std::span<const double> values);

}  // namespace ltr

#endif  // LTR_METRICS_H_
