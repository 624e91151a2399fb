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

// Pair extraction, the pairwise / symmetric / trip-quality-weighted losses,
// and training loops for every ranker variant.
//
// One optimizer step is taken per impression: the mean (weighted) loss over
// that impression's pairs. All pairs of an impression share a context, which
// the multivariate rankers evaluate once per step.

#ifndef LTR_TRAINING_H_
#define LTR_TRAINING_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ltr/marketplace.h"
#include "ltr/neural.h"
#include "ltr/rankers.h"

namespace ltr {

struct TrainConfig {
  int epochs = 8;
  double learning_rate = 2e-3;
  OptimizerAlgorithm optimizer = OptimizerAlgorithm::kAdam;
  std::uint64_t shuffle_seed = 1;
  std::uint64_t init_seed = 1;
  // 0 keeps every not-booked listing; otherwise sample this many.
  int pairs_per_impression = 0;
  // Impressions per optimizer step; gradients are averaged over the batch.
  int batch_size = 1;
  bool trip_quality_weighting = false;
  double trip_quality_alpha = 0.5;
  // Multivariate rankers only; false trains the non-residual ablation.
  bool residual = true;
  RankerShape shape;

  void validate() const;
};

// A (booked, not booked) pair. Non-owning: `impression` must outlive it.
struct TrainingPair {
  const Impression* impression = nullptr;
  std::size_t booked = 0;
  std::size_t not_booked = 0;

  const Listing& booked_listing() const { return impression->candidates[booked]; }
  const Listing& not_booked_listing() const {
    return impression->candidates[not_booked];
  }
  const Query& query() const { return impression->query; }
  const std::vector<Listing>& context() const { return impression->candidates; }
  int trip_rating() const { return impression->trip_rating; }
};

struct PairSet {
  std::vector<TrainingPair> pairs;
  // Impressions with a single candidate.
  int skipped = 0;
};

// Pairs are grouped by impression, in log order. With pairs_per_impression
// > 0 the not-booked listings are sampled from mix_seed(shuffle_seed, i).
PairSet extract_pairs(const std::vector<Impression>& log, const TrainConfig& config);

struct LossGradient {
  double loss = 0.0;
  // Derivatives with respect to the first and second argument.
  double d_first = 0.0;
  double d_second = 0.0;
};

// -log(sigmoid(booked - not_booked)) = softplus(not_booked - booked).
double pairwise_loss(double booked_logit, double not_booked_logit);
LossGradient pairwise_loss_gradient(double booked_logit, double not_booked_logit);

// -log(sigmoid(g_fwd)) - log(1 - sigmoid(g_rev)).
double true_pairwise_loss(double g_fwd, double g_rev);
LossGradient true_pairwise_loss_gradient(double g_fwd, double g_rev);

// alpha * (rating - 3) / 2, floored at 0. Throws ValidationError for a
// rating outside {1..5}.
double trip_quality_weight(int trip_rating, double alpha = 0.5);
// 1 + trip_quality_weight
double total_weight(int trip_rating, double alpha = 0.5);
// base_loss * omega_total; throws ValidationError if omega_total < 1.
double weighted_loss(double base_loss, double omega_total);

// Mean weighted loss over `pairs` (all from one impression) and, when a
// gradient buffer is given, its gradient with respect to the trainable
// parameters.
double pairwise_group_loss(const PairwiseRanker& r, std::span<const TrainingPair> pairs,
                           const TrainConfig& config, GradientSet* grads);
double true_pairwise_group_loss(const TruePairwiseRanker& r,
                                std::span<const TrainingPair> pairs,
                                const TrainConfig& config, GradientSet* grads);
double all_pairwise_group_loss(const AllPairwiseRanker& r,
                               std::span<const TrainingPair> pairs,
                               const TrainConfig& config, AllPairwiseGradients* grads);
double attention_group_loss(const AttentionRanker& r, std::span<const TrainingPair> pairs,
                            const TrainConfig& config, AttentionGradients* grads);

struct EpochStats {
  int epoch = 0;
  double mean_loss = 0.0;
  std::size_t pair_count = 0;
};

struct TrainResult {
  RankerVariant ranker;
  std::vector<EpochStats> loss_trace;
};

// Trains `kind` on `log`. Multivariate kinds train on top of `base`, which
// stays frozen; without one, a pairwise ranker is trained first from the
// same config. Throws TrainingError when no pairs exist and DivergenceError
// on a non-finite loss.
TrainResult train_variant(VariantKind kind, const std::vector<Impression>& log,
                          const TrainConfig& config,
                          const std::optional<PairwiseRanker>& base = std::nullopt);

// Fresh, untrained ranker of the given kind (base used by multivariate kinds).
RankerVariant initial_ranker(VariantKind kind, const TrainConfig& config,
                             const std::optional<PairwiseRanker>& base);

// CSV: epoch,mean_loss,pair_count
void write_loss_trace(const std::vector<EpochStats>& trace, const std::string& path);

}  // namespace ltr

#endif  // LTR_TRAINING_H_
