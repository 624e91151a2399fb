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

// Two-stage ranking: O(N) pairwise scoring of every candidate, then an
// O(k^2) rerank of the top k by a bivariate or multivariate ranker. The tail
// below k keeps its first-stage order, so the output is always a total
// order over all candidates.

#ifndef LTR_PIPELINE_H_
#define LTR_PIPELINE_H_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ltr/marketplace.h"
#include "ltr/rankers.h"

namespace ltr {

// Instrumented evaluation counts.
struct ScoringStats {
  // Evaluations of a univariate scorer f.
  std::size_t pointwise_evals = 0;
  // Unique g(a, b) evaluations; g(b, a) is derived by negation.
  std::size_t pair_evals = 0;
  // Ordered (i, j != i) peer interactions of a multivariate ranker.
  std::size_t interaction_evals = 0;
};

struct PipelineConfig {
  PairwiseRanker first_stage;
  std::optional<RankerVariant> second_stage;
  std::size_t rerank_top_k = 60;

  void validate() const;
};

struct FirstStageResult {
  // Candidate indices, best first.
  std::vector<std::size_t> order;
  // f(l) per candidate, aligned with the input (not with `order`).
  std::vector<double> logits;
};

// Throws ShapeError on an empty candidate set.
FirstStageResult first_stage_rank(const PairwiseRanker& f, const Query& query,
                                  const std::vector<Listing>& candidates,
                                  ScoringStats* stats = nullptr);

// Real-valued scores (higher is better) for every listing in `set` under
// `variant`. True-pairwise variants aggregate by mean or by the log of the
// generalized Bradley-Terry score. retained_logits are the first-stage
// logits aligned with `set`.
std::vector<double> second_stage_scores(const RankerVariant& variant,
                                        const Query& query,
                                        const std::vector<Listing>& set,
                                        std::span<const double> retained_logits,
                                        ScoringStats* stats = nullptr);

// Permutation of [0, k) ordering `top_k` under `variant`. k = 1 is returned
// unchanged. Throws ValidationError if retained_logits is misaligned.
std::vector<std::size_t> second_stage_rerank(const RankerVariant& variant,
                                             const Query& query,
                                             const std::vector<Listing>& top_k,
                                             std::span<const double> retained_logits,
                                             ScoringStats* stats = nullptr);

struct RankResult {
  // Candidate indices in final display order.
  std::vector<std::size_t> ordering;
  // Per candidate: 0 if reranked by the second stage, 1 otherwise.
  std::vector<int> tier;
  // Per candidate: the score that ordered it within its tier.
  std::vector<double> scores;
  // Per candidate: 0-based first-stage rank, the tie-break inside a tier.
  std::vector<std::size_t> first_stage_position;
  ScoringStats stats;
  double first_stage_ms = 0.0;
  double second_stage_ms = 0.0;
  std::size_t reranked = 0;
};

// The strict order rank() sorts by: lower tier first, then higher score,
// then earlier first-stage position.
bool ranks_before(const RankResult& result, std::size_t a, std::size_t b);

RankResult rank(const PipelineConfig& config, const Query& query,
                const std::vector<Listing>& candidates);

}  // namespace ltr

#endif  // LTR_PIPELINE_H_
