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

// Collapsing true-pairwise logits into one score per listing.

#ifndef LTR_AGGREGATION_H_
#define LTR_AGGREGATION_H_

#include <cstddef>
#include <span>
#include <vector>

namespace ltr {

// g(l_i, l_j) for every j != i, in ascending j.
struct PairLogitRow {
  std::size_t listing_index = 0;
  std::vector<double> logits_vs_others;
};

// Rows of a full N x N logit matrix (diagonal ignored), row-major.
std::vector<PairLogitRow> rows_from_matrix(std::span<const double> matrix,
                                           std::size_t n);

// Generalized Bradley-Terry: 1 / (1 + sum_{j != i} exp(-g_ij)).
// Summed in row order; switches to log-sum-exp once any -g exceeds 700.
// Throws NumericError on a non-finite logit.
double gbt_score(const PairLogitRow& row);
// log(gbt_score), computed stably. Same ordering as gbt_score, but does not
// saturate at 1.0 when a listing dominates.
double gbt_log_score(const PairLogitRow& row);

// Mean of the row; 0 for an empty row.
double avg_score(const PairLogitRow& row);

// Descending, stable: ties keep ascending index order.
// Throws NumericError on a non-finite score.
std::vector<std::size_t> scores_to_ranking(std::span<const double> scores);

}  // namespace ltr

#endif  // LTR_AGGREGATION_H_
