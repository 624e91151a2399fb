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

#include "ltr/metrics.h"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "ltr/errors.h"

namespace ltr {

double ndcg(const RankedImpression& ri, std::size_t cutoff) {
  const std::size_t n = ri.ordering.size();
  std::vector<bool> seen(n, false);
  std::size_t position = 0;
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t c = ri.ordering[r];
    if (c >= n || seen[c]) throw ValidationError("ordering is not a permutation");
    seen[c] = true;
    if (c == ri.booked_index) position = r + 1;
  }
  if (position == 0) throw ValidationError("booked listing is not in the ordering");
  if (cutoff > 0 && position > cutoff) return 0.0;
  return 1.0 / std::log2(1.0 + static_cast<double>(position));
}

namespace {

double population_variance(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size());
}

}  // namespace

double price_variance_diversity(std::span<const double> ranked_prices,
                                std::size_t page_size) {
  if (page_size == 0) throw ValidationError("page_size must be >= 1");
  if (page_size > ranked_prices.size()) {
    throw ValidationError("page_size exceeds the number of candidates");
  }
  const auto [lo, hi] = std::minmax_element(ranked_prices.begin(), ranked_prices.end());
  if (*lo == *hi) return 0.0;
  const double total = population_variance(ranked_prices);
  return population_variance(ranked_prices.first(page_size)) / total;
}

std::vector<double> ranked_prices(const RankedImpression& ri) {
  std::vector<double> out;
  out.reserve(ri.ordering.size());
  for (std::size_t c : ri.ordering) out.push_back(ri.prices.at(c));
  return out;
}

std::size_t count_flips(std::span<const std::int64_t> original_ranking,
                        std::span<const std::int64_t> jittered_ranking,
                        std::size_t k) {
  if (k > original_ranking.size() || k > jittered_ranking.size()) {
    throw ValidationError("k exceeds a ranking length");
  }
  const std::unordered_set<std::int64_t> available(original_ranking.begin(),
                                                   original_ranking.end());
  const std::unordered_set<std::int64_t> original_top(original_ranking.begin(),
                                                      original_ranking.begin() + k);
  std::size_t flips = 0;
  for (std::size_t r = 0; r < k; ++r) {
    const std::int64_t id = jittered_ranking[r];
    if (available.count(id) && !original_top.count(id)) ++flips;
  }
  return flips;
}

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

double stddev(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  double s = 0.0;
  for (double v : values) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(values.size() - 1));
}

}  // namespace ltr
