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

#include "ltr/rankers.h"

#include <cmath>
#include <string>
#include <type_traits>
#include <utility>

#include "ltr/errors.h"
#include "ltr/random.h"

namespace ltr {

namespace {

NetConfig make_config(int in, const std::vector<int>& hidden, int out,
                      Activation activation, std::uint64_t seed) {
  NetConfig c;
  c.layer_widths.push_back(in);
  c.layer_widths.insert(c.layer_widths.end(), hidden.begin(), hidden.end());
  c.layer_widths.push_back(out);
  c.activation = activation;
  c.init_seed = seed;
  return c;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

void check_peers(const std::vector<Listing>& listings, std::size_t i) {
  if (listings.size() < 2) {
    throw DegenerateInputError("interaction features need at least 2 listings");
  }
  if (i >= listings.size()) throw ShapeError("listing index out of range");
}

void check_base_logits(const std::vector<Listing>& listings,
                       std::span<const double> base_logits) {
  if (base_logits.size() != listings.size()) {
    throw ShapeError("base logits are not aligned with the listings");
  }
}

std::vector<std::vector<double>> net_outputs(const FeedForwardNet& net,
                                             const std::vector<Listing>& listings,
                                             const Query& query,
                                             const RankerShape& shape) {
  std::vector<std::vector<double>> out;
  out.reserve(listings.size());
  for (const Listing& l : listings) out.push_back(net.forward(model_input(l, query, shape)));
  return out;
}

// sum_{j != i} weight(j) * rows[j] + bias
template <typename WeightFn>
std::vector<double> weighted_sum(std::size_t i,
                                 const std::vector<std::vector<double>>& rows,
                                 std::span<const double> bias, WeightFn weight) {
  std::vector<double> out(bias.begin(), bias.end());
  for (std::size_t j = 0; j < rows.size(); ++j) {
    if (j == i) continue;
    const double w = weight(j);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += w * rows[j][k];
  }
  return out;
}

// softmax over j != i of scores(i, j); entry i is 0.
template <typename ScoreFn>
std::vector<double> peer_softmax(std::size_t i, std::size_t n, ScoreFn score) {
  std::vector<double> logits;
  logits.reserve(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    if (j != i) logits.push_back(score(j));
  }
  const std::vector<double> p = softmax(logits);
  std::vector<double> w(n, 0.0);
  std::size_t k = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j != i) w[j] = p[k++];
  }
  return w;
}

std::vector<double> concat(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace

void RankerShape::validate() const {
  if (listing_width < 1 || query_width < 0 || feature_width < 1 ||
      embedding_width < 1) {
    throw ConfigError("ranker widths must be positive");
  }
  for (int h : hidden) {
    if (h < 1) throw ConfigError("hidden widths must be positive");
  }
  for (int h : feature_hidden) {
    if (h < 1) throw ConfigError("hidden widths must be positive");
  }
}

std::vector<double> model_input(const Listing& listing, const Query& query,
                                const RankerShape& shape) {
  if (static_cast<int>(listing.features.size()) != shape.listing_width ||
      static_cast<int>(query.features.size()) != shape.query_width) {
    throw ShapeError("listing/query widths do not match the ranker");
  }
  std::vector<double> x;
  x.reserve(static_cast<std::size_t>(shape.model_input_width()));
  x.insert(x.end(), listing.features.begin(), listing.features.end());
  x.insert(x.end(), query.features.begin(), query.features.end());
  return x;
}

std::vector<double> pair_input(const Listing& a, const Listing& b, const Query& query,
                               const RankerShape& shape) {
  if (static_cast<int>(a.features.size()) != shape.listing_width ||
      static_cast<int>(b.features.size()) != shape.listing_width ||
      static_cast<int>(query.features.size()) != shape.query_width) {
    throw ShapeError("listing/query widths do not match the ranker");
  }
  std::vector<double> x;
  x.reserve(static_cast<std::size_t>(2 * shape.listing_width + shape.query_width));
  x.insert(x.end(), a.features.begin(), a.features.end());
  x.insert(x.end(), b.features.begin(), b.features.end());
  x.insert(x.end(), query.features.begin(), query.features.end());
  return x;
}

PairwiseRanker PairwiseRanker::create(const RankerShape& shape, std::uint64_t seed) {
  shape.validate();
  return {shape, FeedForwardNet(make_config(shape.model_input_width(), shape.hidden, 1,
                                            shape.activation, seed))};
}

double pointwise_logit(const PairwiseRanker& r, const Listing& listing,
                       const Query& query) {
  return r.f.forward(model_input(listing, query, r.shape))[0];
}

double pairwise_logit(const PairwiseRanker& r, const Listing& a, const Listing& b,
                      const Query& query) {
  return pointwise_logit(r, a, query) - pointwise_logit(r, b, query);
}

double pairwise_probability(const PairwiseRanker& r, const Listing& a,
                            const Listing& b, const Query& query) {
  return sigmoid(pairwise_logit(r, a, b, query));
}

std::vector<double> pointwise_logits(const PairwiseRanker& r,
                                     const std::vector<Listing>& listings,
                                     const Query& query) {
  std::vector<double> out;
  out.reserve(listings.size());
  for (const Listing& l : listings) out.push_back(pointwise_logit(r, l, query));
  return out;
}

TruePairwiseRanker TruePairwiseRanker::create(const RankerShape& shape,
                                              std::uint64_t seed) {
  shape.validate();
  const int in = 2 * shape.listing_width + shape.query_width;
  return {shape, FeedForwardNet(make_config(in, shape.hidden, 1, shape.activation, seed))};
}

double interaction_score(const TruePairwiseRanker& r, const Listing& a,
                         const Listing& b, const Query& query) {
  return r.h.forward(pair_input(a, b, query, r.shape))[0];
}

double true_pairwise_logit(const TruePairwiseRanker& r, const Listing& a,
                           const Listing& b, const Query& query) {
  return interaction_score(r, a, b, query) - interaction_score(r, b, a, query);
}

AllPairwiseRanker AllPairwiseRanker::create(PairwiseRanker base, std::uint64_t seed,
                                            bool residual) {
  const RankerShape& s = base.shape;
  const int in = s.model_input_width();
  const int k = s.feature_width;
  AllPairwiseRanker r;
  r.phi_sup = FeedForwardNet(make_config(in, s.feature_hidden, k, s.activation, mix_seed(seed, 1)));
  r.psi_embed = FeedForwardNet(
      make_config(in, s.feature_hidden, s.embedding_width, s.activation, mix_seed(seed, 2)));
  r.phi_sim = FeedForwardNet(make_config(in, s.feature_hidden, k, s.activation, mix_seed(seed, 3)));
  r.beta_sup.assign(static_cast<std::size_t>(k), 0.0);
  r.beta_sim.assign(static_cast<std::size_t>(k), 0.0);
  r.apln = FeedForwardNet(make_config(2 * k, s.hidden, 1, s.activation, mix_seed(seed, 4)));
  r.apln.zero_output_layer();
  r.residual = residual;
  r.base_f = std::move(base);
  return r;
}

std::size_t AllPairwiseRanker::parameter_count() const {
  return phi_sup.parameter_count() + psi_embed.parameter_count() +
         phi_sim.parameter_count() + beta_sup.size() + beta_sim.size() +
         apln.parameter_count();
}

std::vector<double> superiority_features(std::size_t i,
                                         const std::vector<Listing>& listings,
                                         const AllPairwiseRanker& r,
                                         const Query& query,
                                         std::span<const double> base_logits) {
  check_peers(listings, i);
  check_base_logits(listings, base_logits);
  std::vector<std::vector<double>> phi(listings.size());
  for (std::size_t j = 0; j < listings.size(); ++j) {
    if (j != i) phi[j] = r.phi_sup.forward(model_input(listings[j], query, r.shape()));
  }
  return weighted_sum(i, phi, r.beta_sup, [&](std::size_t j) {
    return sigmoid(base_logits[i] - base_logits[j]);
  });
}

std::vector<double> superiority_features(std::size_t i,
                                         const std::vector<Listing>& listings,
                                         const AllPairwiseRanker& r,
                                         const Query& query) {
  const std::vector<double> base = pointwise_logits(r.base_f, listings, query);
  return superiority_features(i, listings, r, query, base);
}

std::vector<double> similarity_features(std::size_t i,
                                        const std::vector<Listing>& listings,
                                        const AllPairwiseRanker& r,
                                        const Query& query) {
  check_peers(listings, i);
  const auto embeddings = net_outputs(r.psi_embed, listings, query, r.shape());
  std::vector<std::vector<double>> phi(listings.size());
  for (std::size_t j = 0; j < listings.size(); ++j) {
    if (j != i) phi[j] = r.phi_sim.forward(model_input(listings[j], query, r.shape()));
  }
  const std::vector<double> w = peer_softmax(i, listings.size(), [&](std::size_t j) {
    return dot(embeddings[i], embeddings[j]);
  });
  return weighted_sum(i, phi, r.beta_sim, [&](std::size_t j) { return w[j]; });
}

double all_pairwise_logit(std::size_t i, const std::vector<Listing>& listings,
                          const AllPairwiseRanker& r, const Query& query,
                          std::span<const double> base_logits) {
  if (listings.empty()) throw ShapeError("no listings to score");
  check_base_logits(listings, base_logits);
  if (i >= listings.size()) throw ShapeError("listing index out of range");
  if (listings.size() == 1) return base_logits[0];
  const std::vector<double> features =
      concat(superiority_features(i, listings, r, query, base_logits),
             similarity_features(i, listings, r, query));
  const double adjustment = r.apln.forward(features)[0];
  return r.residual ? base_logits[i] + adjustment : adjustment;
}

double all_pairwise_logit(std::size_t i, const std::vector<Listing>& listings,
                          const AllPairwiseRanker& r, const Query& query) {
  const std::vector<double> base = pointwise_logits(r.base_f, listings, query);
  return all_pairwise_logit(i, listings, r, query, base);
}

AttentionRanker AttentionRanker::create(PairwiseRanker base, std::uint64_t seed,
                                        bool residual) {
  const RankerShape& s = base.shape;
  const int e = s.embedding_width;
  AttentionRanker r;
  r.embed = FeedForwardNet(make_config(s.model_input_width(), s.feature_hidden, e,
                                       s.activation, mix_seed(seed, 1)));
  r.query_proj = FeedForwardNet(make_config(e, {}, e, s.activation, mix_seed(seed, 2)));
  r.key_proj = FeedForwardNet(make_config(e, {}, e, s.activation, mix_seed(seed, 3)));
  r.value_proj = FeedForwardNet(make_config(e, {}, e, s.activation, mix_seed(seed, 4)));
  r.apln = FeedForwardNet(make_config(2 * e, s.hidden, 1, s.activation, mix_seed(seed, 5)));
  r.apln.zero_output_layer();
  r.residual = residual;
  r.base_f = std::move(base);
  return r;
}

std::size_t AttentionRanker::parameter_count() const {
  return embed.parameter_count() + query_proj.parameter_count() +
         key_proj.parameter_count() + value_proj.parameter_count() +
         apln.parameter_count();
}

std::vector<double> attention_context(std::size_t i,
                                      const std::vector<Listing>& listings,
                                      const AttentionRanker& r, const Query& query) {
  check_peers(listings, i);
  const auto embeddings = net_outputs(r.embed, listings, query, r.shape());
  const double scale = 1.0 / std::sqrt(static_cast<double>(r.embedding_width()));
  const std::vector<double> q = r.query_proj.forward(embeddings[i]);
  std::vector<std::vector<double>> values(listings.size());
  std::vector<double> keys_dot(listings.size(), 0.0);
  for (std::size_t j = 0; j < listings.size(); ++j) {
    if (j == i) continue;
    keys_dot[j] = dot(q, r.key_proj.forward(embeddings[j])) * scale;
    values[j] = r.value_proj.forward(embeddings[j]);
  }
  const std::vector<double> w =
      peer_softmax(i, listings.size(), [&](std::size_t j) { return keys_dot[j]; });
  const std::vector<double> zero(static_cast<std::size_t>(r.embedding_width()), 0.0);
  return weighted_sum(i, values, zero, [&](std::size_t j) { return w[j]; });
}

double attention_logit(std::size_t i, const std::vector<Listing>& listings,
                       const AttentionRanker& r, const Query& query,
                       std::span<const double> base_logits) {
  if (listings.empty()) throw ShapeError("no listings to score");
  check_base_logits(listings, base_logits);
  if (i >= listings.size()) throw ShapeError("listing index out of range");
  if (listings.size() == 1) return base_logits[0];
  const std::vector<double> own = r.embed.forward(model_input(listings[i], query, r.shape()));
  const double adjustment =
      r.apln.forward(concat(own, attention_context(i, listings, r, query)))[0];
  return r.residual ? base_logits[i] + adjustment : adjustment;
}

double attention_logit(std::size_t i, const std::vector<Listing>& listings,
                       const AttentionRanker& r, const Query& query) {
  const std::vector<double> base = pointwise_logits(r.base_f, listings, query);
  return attention_logit(i, listings, r, query, base);
}

AllPairwiseGradients::AllPairwiseGradients(const AllPairwiseRanker& r)
    : phi_sup(r.phi_sup.zero_gradients()),
      psi_embed(r.psi_embed.zero_gradients()),
      phi_sim(r.phi_sim.zero_gradients()),
      apln(r.apln.zero_gradients()),
      beta_sup(r.beta_sup.size(), 0.0),
      beta_sim(r.beta_sim.size(), 0.0) {}

AllPairwiseTape all_pairwise_forward(const AllPairwiseRanker& r,
                                     const std::vector<Listing>& listings,
                                     const Query& query,
                                     std::span<const double> base_logits) {
  check_peers(listings, 0);
  check_base_logits(listings, base_logits);
  const std::size_t n = listings.size();
  const std::size_t k = r.beta_sup.size();
  AllPairwiseTape tape;
  tape.base_logits.assign(base_logits.begin(), base_logits.end());
  tape.sup_traces.reserve(n);
  tape.embed_traces.reserve(n);
  tape.sim_traces.reserve(n);
  for (const Listing& l : listings) {
    const std::vector<double> x = model_input(l, query, r.shape());
    tape.sup_traces.push_back(r.phi_sup.forward_trace(x));
    tape.embed_traces.push_back(r.psi_embed.forward_trace(x));
    tape.sim_traces.push_back(r.phi_sim.forward_trace(x));
  }
  tape.superiority.assign(n * n, 0.0);
  tape.similarity.assign(n * n, 0.0);
  tape.apln_traces.reserve(n);
  tape.logits.resize(n);
  std::vector<double> features(2 * k);
  for (std::size_t i = 0; i < n; ++i) {
    const auto w = peer_softmax(i, n, [&](std::size_t j) {
      return dot(tape.embed_traces[i].output(), tape.embed_traces[j].output());
    });
    for (std::size_t kk = 0; kk < k; ++kk) {
      features[kk] = r.beta_sup[kk];
      features[k + kk] = r.beta_sim[kk];
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double s = sigmoid(base_logits[i] - base_logits[j]);
      tape.superiority[i * n + j] = s;
      tape.similarity[i * n + j] = w[j];
      const auto phi_sup = tape.sup_traces[j].output();
      const auto phi_sim = tape.sim_traces[j].output();
      for (std::size_t kk = 0; kk < k; ++kk) {
        features[kk] += s * phi_sup[kk];
        features[k + kk] += w[j] * phi_sim[kk];
      }
    }
    tape.apln_traces.push_back(r.apln.forward_trace(features));
    const double adjustment = tape.apln_traces.back().output()[0];
    tape.logits[i] = r.residual ? base_logits[i] + adjustment : adjustment;
  }
  return tape;
}

void all_pairwise_backward(const AllPairwiseRanker& r, const AllPairwiseTape& tape,
                           std::span<const double> logit_grads,
                           AllPairwiseGradients& grads) {
  const std::size_t n = tape.logits.size();
  if (logit_grads.size() != n) throw ShapeError("logit gradients are misaligned");
  const std::size_t k = r.beta_sup.size();
  const std::size_t e = static_cast<std::size_t>(r.psi_embed.output_width());
  std::vector<std::vector<double>> d_phi_sup(n, std::vector<double>(k, 0.0));
  std::vector<std::vector<double>> d_phi_sim(n, std::vector<double>(k, 0.0));
  std::vector<std::vector<double>> d_embed(n, std::vector<double>(e, 0.0));
  std::vector<double> dw(n);
  std::vector<double> da(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (logit_grads[i] == 0.0) continue;
    const double upstream[1] = {logit_grads[i]};
    const std::vector<double> d_features =
        r.apln.backward(tape.apln_traces[i], upstream, grads.apln);
    const double* d_sup = d_features.data();
    const double* d_sim = d_features.data() + k;
    for (std::size_t kk = 0; kk < k; ++kk) {
      grads.beta_sup[kk] += d_sup[kk];
      grads.beta_sim[kk] += d_sim[kk];
    }
    const double* w = tape.similarity.data() + i * n;
    double weighted = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double s = tape.superiority[i * n + j];
      const auto phi_sim = tape.sim_traces[j].output();
      double d = 0.0;
      for (std::size_t kk = 0; kk < k; ++kk) {
        d_phi_sup[j][kk] += s * d_sup[kk];
        d_phi_sim[j][kk] += w[j] * d_sim[kk];
        d += d_sim[kk] * phi_sim[kk];
      }
      dw[j] = d;
      weighted += w[j] * d;
    }
    const auto e_i = tape.embed_traces[i].output();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      da[j] = w[j] * (dw[j] - weighted);
      const auto e_j = tape.embed_traces[j].output();
      for (std::size_t c = 0; c < e; ++c) {
        d_embed[i][c] += da[j] * e_j[c];
        d_embed[j][c] += da[j] * e_i[c];
      }
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    r.phi_sup.backward(tape.sup_traces[j], d_phi_sup[j], grads.phi_sup);
    r.phi_sim.backward(tape.sim_traces[j], d_phi_sim[j], grads.phi_sim);
    r.psi_embed.backward(tape.embed_traces[j], d_embed[j], grads.psi_embed);
  }
}

AttentionGradients::AttentionGradients(const AttentionRanker& r)
    : embed(r.embed.zero_gradients()),
      query_proj(r.query_proj.zero_gradients()),
      key_proj(r.key_proj.zero_gradients()),
      value_proj(r.value_proj.zero_gradients()),
      apln(r.apln.zero_gradients()) {}

AttentionTape attention_forward(const AttentionRanker& r,
                                const std::vector<Listing>& listings,
                                const Query& query,
                                std::span<const double> base_logits) {
  check_peers(listings, 0);
  check_base_logits(listings, base_logits);
  const std::size_t n = listings.size();
  const std::size_t e = static_cast<std::size_t>(r.embedding_width());
  const double scale = 1.0 / std::sqrt(static_cast<double>(e));
  AttentionTape tape;
  tape.base_logits.assign(base_logits.begin(), base_logits.end());
  for (const Listing& l : listings) {
    tape.embed_traces.push_back(r.embed.forward_trace(model_input(l, query, r.shape())));
    const auto emb = tape.embed_traces.back().output();
    tape.query_traces.push_back(r.query_proj.forward_trace(emb));
    tape.key_traces.push_back(r.key_proj.forward_trace(emb));
    tape.value_traces.push_back(r.value_proj.forward_trace(emb));
  }
  tape.attention.assign(n * n, 0.0);
  tape.logits.resize(n);
  std::vector<double> features(2 * e);
  for (std::size_t i = 0; i < n; ++i) {
    const auto q = tape.query_traces[i].output();
    const auto w = peer_softmax(i, n, [&](std::size_t j) {
      return dot(q, tape.key_traces[j].output()) * scale;
    });
    const auto own = tape.embed_traces[i].output();
    for (std::size_t c = 0; c < e; ++c) {
      features[c] = own[c];
      features[e + c] = 0.0;
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      tape.attention[i * n + j] = w[j];
      const auto v = tape.value_traces[j].output();
      for (std::size_t c = 0; c < e; ++c) features[e + c] += w[j] * v[c];
    }
    tape.apln_traces.push_back(r.apln.forward_trace(features));
    const double adjustment = tape.apln_traces.back().output()[0];
    tape.logits[i] = r.residual ? base_logits[i] + adjustment : adjustment;
  }
  return tape;
}

void attention_backward(const AttentionRanker& r, const AttentionTape& tape,
                        std::span<const double> logit_grads, AttentionGradients& grads) {
  const std::size_t n = tape.logits.size();
  if (logit_grads.size() != n) throw ShapeError("logit gradients are misaligned");
  const std::size_t e = static_cast<std::size_t>(r.embedding_width());
  const double scale = 1.0 / std::sqrt(static_cast<double>(e));
  std::vector<std::vector<double>> d_embed(n, std::vector<double>(e, 0.0));
  std::vector<std::vector<double>> d_query(n, std::vector<double>(e, 0.0));
  std::vector<std::vector<double>> d_key(n, std::vector<double>(e, 0.0));
  std::vector<std::vector<double>> d_value(n, std::vector<double>(e, 0.0));
  std::vector<double> dw(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (logit_grads[i] == 0.0) continue;
    const double upstream[1] = {logit_grads[i]};
    const std::vector<double> d_features =
        r.apln.backward(tape.apln_traces[i], upstream, grads.apln);
    const double* d_ctx = d_features.data() + e;
    for (std::size_t c = 0; c < e; ++c) d_embed[i][c] += d_features[c];
    const double* w = tape.attention.data() + i * n;
    double weighted = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const auto v = tape.value_traces[j].output();
      double d = 0.0;
      for (std::size_t c = 0; c < e; ++c) {
        d_value[j][c] += w[j] * d_ctx[c];
        d += d_ctx[c] * v[c];
      }
      dw[j] = d;
      weighted += w[j] * d;
    }
    const auto q = tape.query_traces[i].output();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double da = w[j] * (dw[j] - weighted) * scale;
      const auto key = tape.key_traces[j].output();
      for (std::size_t c = 0; c < e; ++c) {
        d_query[i][c] += da * key[c];
        d_key[j][c] += da * q[c];
      }
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    auto add = [&](const std::vector<double>& d) {
      for (std::size_t c = 0; c < e; ++c) d_embed[j][c] += d[c];
    };
    add(r.query_proj.backward(tape.query_traces[j], d_query[j], grads.query_proj));
    add(r.key_proj.backward(tape.key_traces[j], d_key[j], grads.key_proj));
    add(r.value_proj.backward(tape.value_traces[j], d_value[j], grads.value_proj));
    r.embed.backward(tape.embed_traces[j], d_embed[j], grads.embed);
  }
}

std::string to_string(VariantKind kind) {
  switch (kind) {
    case VariantKind::kPairwise:
      return "pairwise";
    case VariantKind::kTruePairwiseAvg:
      return "true_pairwise_avg";
    case VariantKind::kTruePairwiseGbt:
      return "true_pairwise_gbt";
    case VariantKind::kAllPairwiseApfn:
      return "all_pairwise_apfn";
    case VariantKind::kAllPairwiseAttn:
      return "all_pairwise_attn";
  }
  return "unknown";
}

VariantKind variant_from_string(const std::string& name) {
  std::string normalized = name;
  for (char& c : normalized) {
    if (c == '-') c = '_';
  }
  for (VariantKind kind : kAllVariants) {
    if (to_string(kind) == normalized) return kind;
  }
  throw ConfigError("unknown ranker variant '" + name + "'");
}

bool is_true_pairwise(VariantKind kind) {
  return kind == VariantKind::kTruePairwiseAvg || kind == VariantKind::kTruePairwiseGbt;
}

bool is_all_pairwise(VariantKind kind) {
  return kind == VariantKind::kAllPairwiseApfn || kind == VariantKind::kAllPairwiseAttn;
}

void RankerVariant::validate() const {
  bool ok = false;
  switch (kind) {
    case VariantKind::kPairwise:
      ok = std::holds_alternative<PairwiseRanker>(model);
      break;
    case VariantKind::kTruePairwiseAvg:
    case VariantKind::kTruePairwiseGbt:
      ok = std::holds_alternative<TruePairwiseRanker>(model);
      break;
    case VariantKind::kAllPairwiseApfn:
      ok = std::holds_alternative<AllPairwiseRanker>(model);
      break;
    case VariantKind::kAllPairwiseAttn:
      ok = std::holds_alternative<AttentionRanker>(model);
      break;
  }
  if (!ok) throw ValidationError("ranker model does not match variant " + to_string(kind));

  auto expect_io = [](const FeedForwardNet& net, int in, int out, const char* name) {
    if (net.input_width() != in || net.output_width() != out) {
      throw ValidationError(std::string(name) + " has the wrong input or output width");
    }
  };
  const RankerShape& s = shape();
  const int in = s.model_input_width();
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, PairwiseRanker>) {
          expect_io(m.f, in, 1, "f");
        } else if constexpr (std::is_same_v<T, TruePairwiseRanker>) {
          expect_io(m.h, 2 * s.listing_width + s.query_width, 1, "h");
        } else if constexpr (std::is_same_v<T, AllPairwiseRanker>) {
          const int k = s.feature_width;
          expect_io(m.base_f.f, in, 1, "f");
          expect_io(m.phi_sup, in, k, "phi_sup");
          expect_io(m.psi_embed, in, s.embedding_width, "psi_embed");
          expect_io(m.phi_sim, in, k, "phi_sim");
          expect_io(m.apln, 2 * k, 1, "apln");
          if (m.beta_sup.size() != static_cast<std::size_t>(k) ||
              m.beta_sim.size() != static_cast<std::size_t>(k)) {
            throw ValidationError("beta width does not match K");
          }
        } else {
          const int e = m.embed.output_width();
          expect_io(m.base_f.f, in, 1, "f");
          expect_io(m.embed, in, e, "embed");
          expect_io(m.query_proj, e, e, "query_proj");
          expect_io(m.key_proj, e, e, "key_proj");
          expect_io(m.value_proj, e, e, "value_proj");
          expect_io(m.apln, 2 * e, 1, "apln");
        }
      },
      model);
}

std::size_t RankerVariant::parameter_count() const {
  return std::visit([](const auto& m) { return m.parameter_count(); }, model);
}

const RankerShape& RankerVariant::shape() const {
  return std::visit(
      [](const auto& m) -> const RankerShape& {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, PairwiseRanker> ||
                      std::is_same_v<T, TruePairwiseRanker>) {
          return m.shape;
        } else {
          return m.shape();
        }
      },
      model);
}

}  // namespace ltr
