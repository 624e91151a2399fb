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

// The three ranker families and the attention substitute.
//
// Every net sees a listing through model_input(): its features followed by
// the query features. Scores are logits (unbounded reals).
//
//   PairwiseRanker      f(l)                      univariate
//   TruePairwiseRanker  g(a, b) = h(a, b) - h(b, a)  bivariate, anti-commutative
//   AllPairwiseRanker   f(l_i) + APLN(sup_i, sim_i)  multivariate, residual
//   AttentionRanker     f(l_i) + APLN(e_i, ctx_i)    multivariate, residual
//
// The multivariate rankers aggregate over peers with sums and softmaxes, so
// a listing's logit does not depend on the order of the other listings.

#ifndef LTR_RANKERS_H_
#define LTR_RANKERS_H_

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ltr/marketplace.h"
#include "ltr/neural.h"

namespace ltr {

struct RankerShape {
  int listing_width = kDefaultFeatureWidth;
  int query_width = kQueryFeatureWidth;
  // Hidden widths of f, h and the logit network.
  std::vector<int> hidden = {32, 16};
  // Hidden widths of phi, psi and the attention embedding.
  std::vector<int> feature_hidden = {16};
  // K: superiority/similarity feature width.
  int feature_width = 16;
  // E: embedding width.
  int embedding_width = 16;
  Activation activation = Activation::kRelu;

  int model_input_width() const { return listing_width + query_width; }
  void validate() const;
  bool operator==(const RankerShape&) const = default;
};

// listing.features ++ query.features; throws ShapeError on a width mismatch.
std::vector<double> model_input(const Listing& listing, const Query& query,
                                const RankerShape& shape);
// a.features ++ b.features ++ query.features
std::vector<double> pair_input(const Listing& a, const Listing& b, const Query& query,
                               const RankerShape& shape);

struct PairwiseRanker {
  RankerShape shape;
  FeedForwardNet f;

  static PairwiseRanker create(const RankerShape& shape, std::uint64_t seed);
  std::size_t parameter_count() const { return f.parameter_count(); }
};

double pointwise_logit(const PairwiseRanker& r, const Listing& listing,
                       const Query& query);
// f(a) - f(b)
double pairwise_logit(const PairwiseRanker& r, const Listing& a, const Listing& b,
                      const Query& query);
// sigmoid(f(a) - f(b))
double pairwise_probability(const PairwiseRanker& r, const Listing& a,
                            const Listing& b, const Query& query);
std::vector<double> pointwise_logits(const PairwiseRanker& r,
                                     const std::vector<Listing>& listings,
                                     const Query& query);

struct TruePairwiseRanker {
  RankerShape shape;
  FeedForwardNet h;

  static TruePairwiseRanker create(const RankerShape& shape, std::uint64_t seed);
  std::size_t parameter_count() const { return h.parameter_count(); }
};

double interaction_score(const TruePairwiseRanker& r, const Listing& a,
                         const Listing& b, const Query& query);
// h(a, b) - h(b, a); g(a, b) == -g(b, a) bit for bit.
double true_pairwise_logit(const TruePairwiseRanker& r, const Listing& a,
                           const Listing& b, const Query& query);

struct AllPairwiseRanker {
  PairwiseRanker base_f;
  FeedForwardNet phi_sup;
  FeedForwardNet psi_embed;
  FeedForwardNet phi_sim;
  std::vector<double> beta_sup;
  std::vector<double> beta_sim;
  FeedForwardNet apln;
  // false: the logit is the APLN output alone (stability ablation).
  bool residual = true;

  // The logit network's output layer starts at zero, so a fresh ranker
  // reproduces base_f exactly.
  static AllPairwiseRanker create(PairwiseRanker base, std::uint64_t seed,
                                  bool residual = true);
  const RankerShape& shape() const { return base_f.shape; }
  int feature_width() const { return static_cast<int>(beta_sup.size()); }
  // Trainable parameters only; base_f is frozen.
  std::size_t parameter_count() const;
};

// beta_sup + sum_{j != i} sigmoid(f_i - f_j) * phi_sup(l_j).
// base_logits are the retained first-stage logits, aligned with listings.
// Throws DegenerateInputError when listings.size() < 2.
std::vector<double> superiority_features(std::size_t i,
                                         const std::vector<Listing>& listings,
                                         const AllPairwiseRanker& r,
                                         const Query& query,
                                         std::span<const double> base_logits);
std::vector<double> superiority_features(std::size_t i,
                                         const std::vector<Listing>& listings,
                                         const AllPairwiseRanker& r,
                                         const Query& query);

// beta_sim + sum_{j != i} w_ij * phi_sim(l_j), w_i. = softmax_{j != i}(e_i . e_j)
std::vector<double> similarity_features(std::size_t i,
                                        const std::vector<Listing>& listings,
                                        const AllPairwiseRanker& r,
                                        const Query& query);

// f(l_i) + APLN(sup_i ++ sim_i). For a single listing the logit is f(l_i).
double all_pairwise_logit(std::size_t i, const std::vector<Listing>& listings,
                          const AllPairwiseRanker& r, const Query& query);
double all_pairwise_logit(std::size_t i, const std::vector<Listing>& listings,
                          const AllPairwiseRanker& r, const Query& query,
                          std::span<const double> base_logits);

struct AttentionRanker {
  PairwiseRanker base_f;
  FeedForwardNet embed;
  FeedForwardNet query_proj;
  FeedForwardNet key_proj;
  FeedForwardNet value_proj;
  FeedForwardNet apln;
  bool residual = true;

  static AttentionRanker create(PairwiseRanker base, std::uint64_t seed,
                                bool residual = true);
  const RankerShape& shape() const { return base_f.shape; }
  int embedding_width() const { return embed.output_width(); }
  std::size_t parameter_count() const;
};

// Single-head scaled dot-product attention of l_i over the other listings.
std::vector<double> attention_context(std::size_t i,
                                      const std::vector<Listing>& listings,
                                      const AttentionRanker& r, const Query& query);
double attention_logit(std::size_t i, const std::vector<Listing>& listings,
                       const AttentionRanker& r, const Query& query);
double attention_logit(std::size_t i, const std::vector<Listing>& listings,
                       const AttentionRanker& r, const Query& query,
                       std::span<const double> base_logits);

// ---------------------------------------------------------------------------
// Batched forward passes with the intermediates needed for training.

struct AllPairwiseTape {
  std::vector<double> base_logits;
  std::vector<FeedForwardNet::Trace> sup_traces;
  std::vector<FeedForwardNet::Trace> embed_traces;
  std::vector<FeedForwardNet::Trace> sim_traces;
  // sigmoid(f_i - f_j), row-major N x N, zero diagonal.
  std::vector<double> superiority;
  // Similarity softmax weights, row-major N x N, zero diagonal.
  std::vector<double> similarity;
  std::vector<FeedForwardNet::Trace> apln_traces;
  std::vector<double> logits;
};

struct AllPairwiseGradients {
  explicit AllPairwiseGradients(const AllPairwiseRanker& r);
  GradientSet phi_sup;
  GradientSet psi_embed;
  GradientSet phi_sim;
  GradientSet apln;
  std::vector<double> beta_sup;
  std::vector<double> beta_sim;
};

// All N logits at once; O(N) net evaluations plus O(N^2 K) aggregation.
// Requires N >= 2.
AllPairwiseTape all_pairwise_forward(const AllPairwiseRanker& r,
                                     const std::vector<Listing>& listings,
                                     const Query& query,
                                     std::span<const double> base_logits);
void all_pairwise_backward(const AllPairwiseRanker& r, const AllPairwiseTape& tape,
                           std::span<const double> logit_grads,
                           AllPairwiseGradients& grads);

struct AttentionTape {
  std::vector<double> base_logits;
  std::vector<FeedForwardNet::Trace> embed_traces;
  std::vector<FeedForwardNet::Trace> query_traces;
  std::vector<FeedForwardNet::Trace> key_traces;
  std::vector<FeedForwardNet::Trace> value_traces;
  // Attention weights, row-major N x N, zero diagonal.
  std::vector<double> attention;
  std::vector<FeedForwardNet::Trace> apln_traces;
  std::vector<double> logits;
};

struct AttentionGradients {
  explicit AttentionGradients(const AttentionRanker& r);
  GradientSet embed;
  GradientSet query_proj;
  GradientSet key_proj;
  GradientSet value_proj;
  GradientSet apln;
};

AttentionTape attention_forward(const AttentionRanker& r,
                                const std::vector<Listing>& listings,
                                const Query& query,
                                std::span<const double> base_logits);
void attention_backward(const AttentionRanker& r, const AttentionTape& tape,
                        std::span<const double> logit_grads, AttentionGradients& grads);

// ---------------------------------------------------------------------------

enum class VariantKind {
  kPairwise,
  kTruePairwiseAvg,
  kTruePairwiseGbt,
  kAllPairwiseApfn,
  kAllPairwiseAttn,
};

inline constexpr VariantKind kAllVariants[] = {
    VariantKind::kPairwise,        VariantKind::kTruePairwiseAvg,
    VariantKind::kTruePairwiseGbt, VariantKind::kAllPairwiseApfn,
    VariantKind::kAllPairwiseAttn,
};

// "pairwise", "true_pairwise_avg", ... ; from_string also accepts dashes.
std::string to_string(VariantKind kind);
VariantKind variant_from_string(const std::string& name);
bool is_true_pairwise(VariantKind kind);
bool is_all_pairwise(VariantKind kind);

using RankerModel =
    std::variant<PairwiseRanker, TruePairwiseRanker, AllPairwiseRanker, AttentionRanker>;

// The tag selects the scoring path; both true-pairwise tags hold a
// TruePairwiseRanker and differ only in aggregation.
struct RankerVariant {
  VariantKind kind = VariantKind::kPairwise;
  RankerModel model;

  // Throws ValidationError if the model alternative does not fit the tag.
  void validate() const;
  std::size_t parameter_count() const;
  const RankerShape& shape() const;
};

}  // namespace ltr

#endif  // LTR_RANKERS_H_
