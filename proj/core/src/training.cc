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

#include "ltr/training.h"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "ltr/errors.h"
#include "ltr/random.h"

namespace ltr {

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (pairs_per_impression < 0) throw ConfigError("pairs_per_impression must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (trip_quality_alpha < 0.0) throw ConfigError("trip_quality_alpha must be >= 0");
  shape.validate();
}

PairSet extract_pairs(const std::vector<Impression>& log, const TrainConfig& config) {
  PairSet out;
  for (std::size_t i = 0; i < log.size(); ++i) {
    const Impression& imp = log[i];
    const std::size_t n = imp.candidates.size();
    if (n < 2) {
      ++out.skipped;
      continue;
    }
    const auto booked = static_cast<std::size_t>(imp.booked_index);
    std::vector<std::size_t> negatives;
    for (std::size_t c = 0; c < n; ++c) {
      if (c != booked) negatives.push_back(c);
    }
    const auto cap = static_cast<std::size_t>(config.pairs_per_impression);
    if (cap > 0 && cap < negatives.size()) {
      std::mt19937_64 rng(mix_seed(config.shuffle_seed, i));
      std::shuffle(negatives.begin(), negatives.end(), rng);
      negatives.resize(cap);
      std::sort(negatives.begin(), negatives.end());
    }
    for (std::size_t c : negatives) out.pairs.push_back({&imp, booked, c});
  }
  return out;
}

namespace {

void check_finite(double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b)) throw NumericError("non-finite logit");
}

}  // namespace

double pairwise_loss(double booked_logit, double not_booked_logit) {
  return pairwise_loss_gradient(booked_logit, not_booked_logit).loss;
}

LossGradient pairwise_loss_gradient(double booked_logit, double not_booked_logit) {
  check_finite(booked_logit, not_booked_logit);
  const double margin = not_booked_logit - booked_logit;
  const double p = sigmoid(margin);
  return {softplus(margin), -p, p};
}

double true_pairwise_loss(double g_fwd, double g_rev) {
  return true_pairwise_loss_gradient(g_fwd, g_rev).loss;
}

LossGradient true_pairwise_loss_gradient(double g_fwd, double g_rev) {
  check_finite(g_fwd, g_rev);
  return {softplus(-g_fwd) + softplus(g_rev), -sigmoid(-g_fwd), sigmoid(g_rev)};
}

double trip_quality_weight(int trip_rating, double alpha) {
  if (trip_rating < 1 || trip_rating > 5) {
    throw ValidationError("trip rating " + std::to_string(trip_rating) +
                          " is outside {1..5}");
  }
  return std::max(0.0, alpha * (trip_rating - 3) / 2.0);
}

double total_weight(int trip_rating, double alpha) {
  return 1.0 + trip_quality_weight(trip_rating, alpha);
}

double weighted_loss(double base_loss, double omega_total) {
  if (!(omega_total >= 1.0)) throw ValidationError("omega_total must be >= 1");
  return base_loss * omega_total;
}

namespace {

double pair_weight(const TrainingPair& p, const TrainConfig& config) {
  return config.trip_quality_weighting
             ? total_weight(p.trip_rating(), config.trip_quality_alpha)
             : 1.0;
}

void check_group(std::span<const TrainingPair> pairs) {
  if (pairs.empty()) throw TrainingError("empty pair group");
  for (const TrainingPair& p : pairs) {
    if (p.impression != pairs.front().impression) {
      throw TrainingError("a pair group must come from a single impression");
    }
  }
}

// Mean weighted logistic pair loss over pairs of per-listing logits; fills dz.
double logit_pair_loss(std::span<const TrainingPair> pairs, const TrainConfig& config,
                       std::span<const double> logits, std::vector<double>& dz) {
  dz.assign(logits.size(), 0.0);
  const double inv = 1.0 / static_cast<double>(pairs.size());
  double total = 0.0;
  for (const TrainingPair& p : pairs) {
    const double w = pair_weight(p, config) * inv;
    const LossGradient lg = pairwise_loss_gradient(logits[p.booked], logits[p.not_booked]);
    total += w * lg.loss;
    dz[p.booked] += w * lg.d_first;
    dz[p.not_booked] += w * lg.d_second;
  }
  return total;
}

}  // namespace

double pairwise_group_loss(const PairwiseRanker& r, std::span<const TrainingPair> pairs,
                           const TrainConfig& config, GradientSet* grads) {
  check_group(pairs);
  const auto& context = pairs.front().context();
  const Query& query = pairs.front().query();
  const std::size_t n = context.size();
  std::vector<FeedForwardNet::Trace> traces(n);
  std::vector<bool> used(n, false);
  for (const TrainingPair& p : pairs) used[p.booked] = used[p.not_booked] = true;
  std::vector<double> logits(n, 0.0);
  for (std::size_t c = 0; c < n; ++c) {
    if (!used[c]) continue;
    traces[c] = r.f.forward_trace(model_input(context[c], query, r.shape));
    logits[c] = traces[c].output()[0];
  }
  std::vector<double> dz;
  const double loss = logit_pair_loss(pairs, config, logits, dz);
  if (grads) {
    for (std::size_t c = 0; c < n; ++c) {
      if (!used[c] || dz[c] == 0.0) continue;
      const double upstream[1] = {dz[c]};
      r.f.backward(traces[c], upstream, *grads);
    }
  }
  return loss;
}

double true_pairwise_group_loss(const TruePairwiseRanker& r,
                                std::span<const TrainingPair> pairs,
                                const TrainConfig& config, GradientSet* grads) {
  check_group(pairs);
  const double inv = 1.0 / static_cast<double>(pairs.size());
  double total = 0.0;
  for (const TrainingPair& p : pairs) {
    const Listing& b = p.booked_listing();
    const Listing& nb = p.not_booked_listing();
    const auto forward = r.h.forward_trace(pair_input(b, nb, p.query(), r.shape));
    const auto reverse = r.h.forward_trace(pair_input(nb, b, p.query(), r.shape));
    const double h_fwd = forward.output()[0];
    const double h_rev = reverse.output()[0];
    const double g_fwd = h_fwd - h_rev;
    const double g_rev = h_rev - h_fwd;
    const LossGradient lg = true_pairwise_loss_gradient(g_fwd, g_rev);
    const double w = pair_weight(p, config) * inv;
    total += w * lg.loss;
    if (grads) {
      const double d_fwd[1] = {w * (lg.d_first - lg.d_second)};
      const double d_rev[1] = {w * (lg.d_second - lg.d_first)};
      r.h.backward(forward, d_fwd, *grads);
      r.h.backward(reverse, d_rev, *grads);
    }
  }
  return total;
}

double all_pairwise_group_loss(const AllPairwiseRanker& r,
                               std::span<const TrainingPair> pairs,
                               const TrainConfig& config, AllPairwiseGradients* grads) {
  check_group(pairs);
  const auto& context = pairs.front().context();
  const Query& query = pairs.front().query();
  const std::vector<double> base = pointwise_logits(r.base_f, context, query);
  const AllPairwiseTape tape = all_pairwise_forward(r, context, query, base);
  std::vector<double> dz;
  const double loss = logit_pair_loss(pairs, config, tape.logits, dz);
  if (grads) all_pairwise_backward(r, tape, dz, *grads);
  return loss;
}

double attention_group_loss(const AttentionRanker& r, std::span<const TrainingPair> pairs,
                            const TrainConfig& config, AttentionGradients* grads) {
  check_group(pairs);
  const auto& context = pairs.front().context();
  const Query& query = pairs.front().query();
  const std::vector<double> base = pointwise_logits(r.base_f, context, query);
  const AttentionTape tape = attention_forward(r, context, query, base);
  std::vector<double> dz;
  const double loss = logit_pair_loss(pairs, config, tape.logits, dz);
  if (grads) attention_backward(r, tape, dz, *grads);
  return loss;
}

RankerVariant initial_ranker(VariantKind kind, const TrainConfig& config,
                             const std::optional<PairwiseRanker>& base) {
  switch (kind) {
    case VariantKind::kPairwise:
      return {kind, PairwiseRanker::create(config.shape, config.init_seed)};
    case VariantKind::kTruePairwiseAvg:
    case VariantKind::kTruePairwiseGbt:
      return {kind, TruePairwiseRanker::create(config.shape, config.init_seed)};
    case VariantKind::kAllPairwiseApfn:
    case VariantKind::kAllPairwiseAttn: {
      if (!base) throw TrainingError("multivariate rankers need a first-stage ranker");
      const std::uint64_t seed = mix_seed(config.init_seed, 0xA11);
      if (kind == VariantKind::kAllPairwiseApfn) {
        return {kind, AllPairwiseRanker::create(*base, seed, config.residual)};
      }
      return {kind, AttentionRanker::create(*base, seed, config.residual)};
    }
  }
  throw TrainingError("unknown variant");
}

namespace {

// A trainable parameter block and its optimizer state.
struct Block {
  std::span<double> params;
  std::span<const double> grads;
  OptimizerState* state;
};

class Trainer {
 public:
  Trainer(const TrainConfig& config, std::size_t pair_count)
      : config_(config), pair_count_(pair_count) {}

  // `step` receives one mini-batch of impression groups and returns the
  // summed pair-count-weighted loss of the batch.
  template <typename BatchFn>
  std::vector<EpochStats> run(const std::vector<std::span<const TrainingPair>>& groups,
                              BatchFn step) {
    std::vector<EpochStats> trace;
    std::vector<std::size_t> order(groups.size());
    const std::size_t batch = static_cast<std::size_t>(config_.batch_size);
    std::vector<std::span<const TrainingPair>> members;
    long global_step = 0;
    for (int epoch = 0; epoch < config_.epochs; ++epoch) {
      std::iota(order.begin(), order.end(), 0);
      std::mt19937_64 rng(mix_seed(config_.shuffle_seed, static_cast<std::uint64_t>(epoch)));
      std::shuffle(order.begin(), order.end(), rng);
      double total = 0.0;
      for (std::size_t start = 0; start < order.size(); start += batch) {
        ++global_step;
        members.clear();
        for (std::size_t k = start; k < std::min(order.size(), start + batch); ++k) {
          members.push_back(groups[order[k]]);
        }
        double loss = 0.0;
        try {
          loss = step(std::span<const std::span<const TrainingPair>>(members));
        } catch (const NumericError& e) {
          throw DivergenceError(std::string(e.what()) + " at step " +
                                    std::to_string(global_step),
                                global_step);
        }
        if (!std::isfinite(loss)) {
          throw DivergenceError("non-finite loss at step " + std::to_string(global_step),
                                global_step);
        }
        total += loss;
      }
      trace.push_back({epoch + 1, total / static_cast<double>(pair_count_), pair_count_});
    }
    return trace;
  }

  OptimizerState make_state(std::size_t size) const {
    return OptimizerState(config_.optimizer, config_.learning_rate, size);
  }

 private:
  const TrainConfig& config_;
  std::size_t pair_count_;
};

void apply(std::span<Block> blocks) {
  for (Block& b : blocks) optimizer_step(b.params, b.grads, *b.state);
}

using Batch = std::span<const std::span<const TrainingPair>>;

// Group mean loss back to a per-pair sum, for the epoch trace.
double weigh(std::span<const TrainingPair> group, double mean_loss) {
  return mean_loss * static_cast<double>(group.size());
}

std::vector<std::span<const TrainingPair>> group_pairs(const std::vector<TrainingPair>& pairs) {
  std::vector<std::span<const TrainingPair>> groups;
  std::size_t start = 0;
  for (std::size_t i = 1; i <= pairs.size(); ++i) {
    if (i == pairs.size() || pairs[i].impression != pairs[start].impression) {
      groups.emplace_back(pairs.data() + start, i - start);
      start = i;
    }
  }
  return groups;
}

}  // namespace

TrainResult train_variant(VariantKind kind, const std::vector<Impression>& log,
                          const TrainConfig& config,
                          const std::optional<PairwiseRanker>& base) {
  config.validate();
  const PairSet pair_set = extract_pairs(log, config);
  if (pair_set.pairs.empty()) throw TrainingError("no training pairs in the log");
  const auto groups = group_pairs(pair_set.pairs);
  Trainer trainer(config, pair_set.pairs.size());

  std::optional<PairwiseRanker> first_stage = base;
  if (is_all_pairwise(kind) && !first_stage) {
    first_stage = std::get<PairwiseRanker>(
        train_variant(VariantKind::kPairwise, log, config).ranker.model);
  }
  TrainResult result;
  result.ranker = initial_ranker(kind, config, first_stage);

  switch (kind) {
    case VariantKind::kPairwise: {
      auto& r = std::get<PairwiseRanker>(result.ranker.model);
      OptimizerState state = trainer.make_state(r.f.parameter_count());
      GradientSet grads = r.f.zero_gradients();
      result.loss_trace = trainer.run(groups, [&](Batch batch) {
        grads.set_zero();
        double loss = 0.0;
        for (const auto& g : batch) loss += weigh(g, pairwise_group_loss(r, g, config, &grads));
        grads.scale(1.0 / static_cast<double>(batch.size()));
        optimizer_step(r.f, grads, state);
        return loss;
      });
      break;
    }
    case VariantKind::kTruePairwiseAvg:
    case VariantKind::kTruePairwiseGbt: {
      auto& r = std::get<TruePairwiseRanker>(result.ranker.model);
      OptimizerState state = trainer.make_state(r.h.parameter_count());
      GradientSet grads = r.h.zero_gradients();
      result.loss_trace = trainer.run(groups, [&](Batch batch) {
        grads.set_zero();
        double loss = 0.0;
        for (const auto& g : batch) {
          loss += weigh(g, true_pairwise_group_loss(r, g, config, &grads));
        }
        grads.scale(1.0 / static_cast<double>(batch.size()));
        optimizer_step(r.h, grads, state);
        return loss;
      });
      break;
    }
    case VariantKind::kAllPairwiseApfn: {
      auto& r = std::get<AllPairwiseRanker>(result.ranker.model);
      std::vector<OptimizerState> states = {
          trainer.make_state(r.phi_sup.parameter_count()),
          trainer.make_state(r.psi_embed.parameter_count()),
          trainer.make_state(r.phi_sim.parameter_count()),
          trainer.make_state(r.beta_sup.size()),
          trainer.make_state(r.beta_sim.size()),
          trainer.make_state(r.apln.parameter_count()),
      };
      result.loss_trace = trainer.run(groups, [&](Batch batch) {
        AllPairwiseGradients grads(r);
        double loss = 0.0;
        for (const auto& g : batch) {
          loss += weigh(g, all_pairwise_group_loss(r, g, config, &grads));
        }
        const double inv = 1.0 / static_cast<double>(batch.size());
        for (GradientSet* gs : {&grads.phi_sup, &grads.psi_embed, &grads.phi_sim, &grads.apln}) {
          gs->scale(inv);
        }
        for (double& v : grads.beta_sup) v *= inv;
        for (double& v : grads.beta_sim) v *= inv;
        Block blocks[] = {
            {r.phi_sup.mutable_parameters(), grads.phi_sup.values(), &states[0]},
            {r.psi_embed.mutable_parameters(), grads.psi_embed.values(), &states[1]},
            {r.phi_sim.mutable_parameters(), grads.phi_sim.values(), &states[2]},
            {r.beta_sup, grads.beta_sup, &states[3]},
            {r.beta_sim, grads.beta_sim, &states[4]},
            {r.apln.mutable_parameters(), grads.apln.values(), &states[5]},
        };
        apply(blocks);
        return loss;
      });
      break;
    }
    case VariantKind::kAllPairwiseAttn: {
      auto& r = std::get<AttentionRanker>(result.ranker.model);
      std::vector<OptimizerState> states = {
          trainer.make_state(r.embed.parameter_count()),
          trainer.make_state(r.query_proj.parameter_count()),
          trainer.make_state(r.key_proj.parameter_count()),
          trainer.make_state(r.value_proj.parameter_count()),
          trainer.make_state(r.apln.parameter_count()),
      };
      result.loss_trace = trainer.run(groups, [&](Batch batch) {
        AttentionGradients grads(r);
        double loss = 0.0;
        for (const auto& g : batch) {
          loss += weigh(g, attention_group_loss(r, g, config, &grads));
        }
        const double inv = 1.0 / static_cast<double>(batch.size());
        for (GradientSet* gs : {&grads.embed, &grads.query_proj, &grads.key_proj,
                                &grads.value_proj, &grads.apln}) {
          gs->scale(inv);
        }
        Block blocks[] = {
            {r.embed.mutable_parameters(), grads.embed.values(), &states[0]},
            {r.query_proj.mutable_parameters(), grads.query_proj.values(), &states[1]},
            {r.key_proj.mutable_parameters(), grads.key_proj.values(), &states[2]},
            {r.value_proj.mutable_parameters(), grads.value_proj.values(), &states[3]},
            {r.apln.mutable_parameters(), grads.apln.values(), &states[4]},
        };
        apply(blocks);
        return loss;
      });
      break;
    }
  }
  return result;
}

void write_loss_trace(const std::vector<EpochStats>& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "epoch,mean_loss,pair_count\n";
  char buf[64];
  for (const EpochStats& e : trace) {
    std::snprintf(buf, sizeof(buf), "%.17g", e.mean_loss);
    out << e.epoch << ',' << buf << ',' << e.pair_count << '\n';
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace ltr
