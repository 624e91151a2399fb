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

#include "ltr/pipeline.h"

#include <algorithm>
#include <chrono>

#include "ltr/aggregation.h"
#include "ltr/errors.h"

namespace ltr {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::vector<double> true_pairwise_scores(const TruePairwiseRanker& r, bool use_gbt,
                                         const Query& query,
                                         const std::vector<Listing>& set,
                                         ScoringStats* stats) {
  const std::size_t n = set.size();
  std::vector<double> matrix(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double g = true_pairwise_logit(r, set[i], set[j], query);
      matrix[i * n + j] = g;
      matrix[j * n + i] = -g;
    }
  }
  if (stats) stats->pair_evals += n * (n - 1) / 2;
  std::vector<double> scores;
  scores.reserve(n);
  for (const PairLogitRow& row : rows_from_matrix(matrix, n)) {
    scores.push_back(use_gbt ? gbt_log_score(row) : avg_score(row));
  }
  return scores;
}

}  // namespace

void PipelineConfig::validate() const {
  if (rerank_top_k < 1) throw ConfigError("rerank_top_k must be >= 1");
  if (second_stage) second_stage->validate();
}

FirstStageResult first_stage_rank(const PairwiseRanker& f, const Query& query,
                                  const std::vector<Listing>& candidates,
                                  ScoringStats* stats) {
  if (candidates.empty()) throw ShapeError("no candidates to rank");
  FirstStageResult result;
  result.logits = pointwise_logits(f, candidates, query);
  if (stats) stats->pointwise_evals += candidates.size();
  result.order = scores_to_ranking(result.logits);
  return result;
}

std::vector<double> second_stage_scores(const RankerVariant& variant,
                                        const Query& query,
                                        const std::vector<Listing>& set,
                                        std::span<const double> retained_logits,
                                        ScoringStats* stats) {
  if (retained_logits.size() != set.size()) {
    throw ValidationError("retained logits are not aligned with the candidates");
  }
  const std::size_t n = set.size();
  switch (variant.kind) {
    case VariantKind::kPairwise: {
      const auto& r = std::get<PairwiseRanker>(variant.model);
      if (stats) stats->pointwise_evals += n;
      return pointwise_logits(r, set, query);
    }
    case VariantKind::kTruePairwiseAvg:
    case VariantKind::kTruePairwiseGbt:
      return true_pairwise_scores(std::get<TruePairwiseRanker>(variant.model),
                                  variant.kind == VariantKind::kTruePairwiseGbt,
                                  query, set, stats);
    case VariantKind::kAllPairwiseApfn: {
      const auto& r = std::get<AllPairwiseRanker>(variant.model);
      if (n < 2) return {retained_logits.begin(), retained_logits.end()};
      if (stats) stats->interaction_evals += n * (n - 1);
      return all_pairwise_forward(r, set, query, retained_logits).logits;
    }
    case VariantKind::kAllPairwiseAttn: {
      const auto& r = std::get<AttentionRanker>(variant.model);
      if (n < 2) return {retained_logits.begin(), retained_logits.end()};
      if (stats) stats->interaction_evals += n * (n - 1);
      return attention_forward(r, set, query, retained_logits).logits;
    }
  }
  throw ValidationError("unknown variant");
}

std::vector<std::size_t> second_stage_rerank(const RankerVariant& variant,
                                             const Query& query,
                                             const std::vector<Listing>& top_k,
                                             std::span<const double> retained_logits,
                                             ScoringStats* stats) {
  if (retained_logits.size() != top_k.size()) {
    throw ValidationError("retained logits are not aligned with the candidates");
  }
  if (top_k.size() < 2) return std::vector<std::size_t>(top_k.size(), 0);
  return scores_to_ranking(second_stage_scores(variant, query, top_k, retained_logits, stats));
}

bool ranks_before(const RankResult& result, std::size_t a, std::size_t b) {
  if (result.tier[a] != result.tier[b]) return result.tier[a] < result.tier[b];
  if (result.scores[a] != result.scores[b]) return result.scores[a] > result.scores[b];
  return result.first_stage_position[a] < result.first_stage_position[b];
}

RankResult rank(const PipelineConfig& config, const Query& query,
                const std::vector<Listing>& candidates) {
  config.validate();
  RankResult result;
  auto start = Clock::now();
  FirstStageResult first =
      first_stage_rank(config.first_stage, query, candidates, &result.stats);
  result.first_stage_ms = elapsed_ms(start);

  const std::size_t n = candidates.size();
  result.tier.assign(n, 1);
  result.scores = first.logits;
  result.ordering = first.order;
  result.first_stage_position.assign(n, 0);
  for (std::size_t r = 0; r < n; ++r) result.first_stage_position[first.order[r]] = r;
  if (!config.second_stage) return result;

  const std::size_t k = std::min(config.rerank_top_k, n);
  if (k < 2) return result;
  start = Clock::now();
  std::vector<Listing> top;
  std::vector<double> retained;
  top.reserve(k);
  retained.reserve(k);
  for (std::size_t r = 0; r < k; ++r) {
    top.push_back(candidates[first.order[r]]);
    retained.push_back(first.logits[first.order[r]]);
  }
  const std::vector<double> scores =
      second_stage_scores(*config.second_stage, query, top, retained, &result.stats);
  const std::vector<std::size_t> reordered = scores_to_ranking(scores);
  result.second_stage_ms = elapsed_ms(start);
  result.reranked = k;

  // Reranked candidates are identified by first-stage rank, which is also
  // the tie-break order inside the top tier.
  for (std::size_t r = 0; r < k; ++r) {
    const std::size_t c = first.order[r];
    result.tier[c] = 0;
    result.scores[c] = scores[r];
  }
  for (std::size_t r = 0; r < k; ++r) result.ordering[r] = first.order[reordered[r]];
  return result;
}

}  // namespace ltr
