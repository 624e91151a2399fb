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

#include "ltr/aggregation.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ltr/errors.h"

namespace ltr {

namespace {

constexpr double kExpGuard = 700.0;

void check_finite(const PairLogitRow& row) {
  for (double g : row.logits_vs_others) {
    if (!std::isfinite(g)) throw NumericError("non-finite pairwise logit");
  }
}

// log(1 + sum_j exp(-g_j))
double log_denominator(const PairLogitRow& row) {
  double m = 0.0;
  for (double g : row.logits_vs_others) m = std::max(m, -g);
  if (m == 0.0) {
    // Every term is <= 1; log1p keeps dominant listings apart.
    double sum = 0.0;
    for (double g : row.logits_vs_others) sum += std::exp(-g);
    return std::log1p(sum);
  }
  double total = std::exp(-m);
  for (double g : row.logits_vs_others) total += std::exp(-g - m);
  return m + std::log(total);
}

}  // namespace

std::vector<PairLogitRow> rows_from_matrix(std::span<const double> matrix,
                                           std::size_t n) {
  if (matrix.size() != n * n) throw ShapeError("logit matrix is not N x N");
  std::vector<PairLogitRow> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    rows[i].listing_index = i;
    rows[i].logits_vs_others.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) rows[i].logits_vs_others.push_back(matrix[i * n + j]);
    }
  }
  return rows;
}

double gbt_score(const PairLogitRow& row) {
  check_finite(row);
  bool overflow = false;
  for (double g : row.logits_vs_others) overflow = overflow || -g > kExpGuard;
  if (overflow) return std::exp(-log_denominator(row));
  double total = 1.0;
  for (double g : row.logits_vs_others) total += std::exp(-g);
  return 1.0 / total;
}

double gbt_log_score(const PairLogitRow& row) {
  check_finite(row);
  return -log_denominator(row);
}

double avg_score(const PairLogitRow& row) {
  check_finite(row);
  if (row.logits_vs_others.empty()) return 0.0;
  double total = 0.0;
  for (double g : row.logits_vs_others) total += g;
  return total / static_cast<double>(row.logits_vs_others.size());
}

std::vector<std::size_t> scores_to_ranking(std::span<const double> scores) {
  for (double s : scores) {
    if (!std::isfinite(s)) throw NumericError("non-finite score");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  return order;
}

}  // namespace ltr
