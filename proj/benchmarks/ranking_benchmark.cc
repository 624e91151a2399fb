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

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "ltr/aggregation.h"
#include "ltr/marketplace.h"
#include "ltr/pipeline.h"
#include "ltr/rankers.h"

namespace ltr {
namespace {

struct Fixture {
  PipelineConfig config;
  Query query;
  std::vector<Listing> candidates;
};

// Default widths, random candidates, every candidate reranked.
Fixture make_fixture(VariantKind kind, int n) {
  Fixture fx;
  const RankerShape shape;
  fx.config.first_stage = PairwiseRanker::create(shape, 1);
  switch (kind) {
    case VariantKind::kPairwise:
      break;
    case VariantKind::kTruePairwiseAvg:
    case VariantKind::kTruePairwiseGbt:
      fx.config.second_stage = RankerVariant{kind, TruePairwiseRanker::create(shape, 2)};
      break;
    case VariantKind::kAllPairwiseApfn:
      fx.config.second_stage =
          RankerVariant{kind, AllPairwiseRanker::create(fx.config.first_stage, 2)};
      break;
    case VariantKind::kAllPairwiseAttn:
      fx.config.second_stage =
          RankerVariant{kind, AttentionRanker::create(fx.config.first_stage, 2)};
      break;
  }
  fx.config.rerank_top_k = static_cast<std::size_t>(n);
  ListingGeneratorConfig gen;
  fx.candidates = generate_listings(n, gen, 3);
  fx.query.features = {0.5, 0.5};
  return fx;
}

void BM_Rank(benchmark::State& state) {
  const auto kind = static_cast<VariantKind>(state.range(0));
  const Fixture fx = make_fixture(kind, static_cast<int>(state.range(1)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(rank(fx.config, fx.query, fx.candidates));
  }
  state.SetLabel(to_string(kind));
  state.SetComplexityN(state.range(1));
}

void RankArgs(benchmark::internal::Benchmark* b) {
  for (VariantKind kind : kAllVariants) {
    for (int n : {10, 20, 40, 60}) b->Args({static_cast<int>(kind), n});
  }
}

BENCHMARK(BM_Rank)->Apply(RankArgs)->Unit(benchmark::kMicrosecond);

void BM_GbtLogScore(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 2.0);
  std::vector<double> m(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      m[i * n + j] = g(rng);
      m[j * n + i] = -m[i * n + j];
    }
  }
  const auto rows = rows_from_matrix(m, n);
  for (auto _ : state) {
    for (const PairLogitRow& row : rows) benchmark::DoNotOptimize(gbt_log_score(row));
  }
}

BENCHMARK(BM_GbtLogScore)->Arg(10)->Arg(60);

}  // namespace
}  // namespace ltr

BENCHMARK_MAIN();
