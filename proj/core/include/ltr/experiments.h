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

// Desk-scale experiment harness.
//
// Every experiment is a pure function of its ExperimentSpec: data come from
// data_seed, each model cell from one of model_seeds. A report is a flat
// list of records, written as CSV with a JSON sidecar that echoes the spec
// and stamps the environment. Wall-clock values (runtime_ms and the latency
// metrics) are flagged as timing and are the only fields that differ
// between reruns of the same spec.

#ifndef LTR_EXPERIMENTS_H_
#define LTR_EXPERIMENTS_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ltr/marketplace.h"
#include "ltr/rankers.h"
#include "ltr/training.h"

namespace ltr {

inline constexpr const char* kArtifactVersion = "1.0.0";

enum class ExperimentKind {
  kParamScaling,
  kRerankTradeoff,
  kDiversity,
  kUncertainty,
  kAbOffline,
  kStability,
  kMultiObjective,
};

inline constexpr ExperimentKind kAllExperiments[] = {
    ExperimentKind::kParamScaling, ExperimentKind::kRerankTradeoff,
    ExperimentKind::kDiversity,    ExperimentKind::kUncertainty,
    ExperimentKind::kAbOffline,    ExperimentKind::kStability,
    ExperimentKind::kMultiObjective,
};

std::string to_string(ExperimentKind kind);
// Throws ConfigError on an unknown name.
ExperimentKind experiment_from_string(const std::string& name);

struct DataConfig {
  int pool_size = 600;
  int train_impressions = 3000;
  int test_impressions = 1000;
  int candidates = 20;
  ListingGeneratorConfig listings;
  ChoiceModelConfig choice;
  QuerySamplerConfig sampler;

  void validate() const;
};

// Optimizer settings for one training stage.
struct Schedule {
  int epochs = 8;
  double learning_rate = 2e-3;
  int batch_size = 1;
};

struct ExperimentSpec {
  ExperimentKind experiment = ExperimentKind::kParamScaling;
  std::uint64_t data_seed = 11;
  std::vector<std::uint64_t> model_seeds;
  DataConfig data;
  RankerShape shape;
  // First-stage pairwise f.
  Schedule first_stage;
  // True-pairwise h and the multivariate rankers.
  Schedule second_stage;
  int pairs_per_impression = 0;
  std::vector<VariantKind> variants;
  // param_scaling: hidden widths per sweep cell.
  std::vector<std::vector<int>> width_sweep;
  // rerank_tradeoff, diversity: rerank_top_k per sweep cell.
  std::vector<int> rerank_ks;
  // Second stage of rerank_tradeoff, diversity, ab_offline and stability.
  VariantKind second_stage_variant = VariantKind::kAllPairwiseApfn;
  // ab_offline: rerank depth of the treatment arm.
  int rerank_top_k = 20;
  // diversity and stability: size of the first page.
  int page_size = 10;
  int stability_queries = 200;
  int jitters_per_query = 5;
  double jitter_magnitude = 0.01;
  double trip_quality_alpha = 0.5;
  // rerank_tradeoff: timed passes over the test log per k; the fastest wins.
  int latency_repeats = 3;
  // CSV path; the sidecar replaces the extension with .json.
  std::string output_path;

  void validate() const;
  TrainConfig train_config(const Schedule& schedule, std::uint64_t seed) const;
};

// Tuned desk-scale defaults for `kind`.
ExperimentSpec default_spec(ExperimentKind kind);
// Overlays the fields present in `j` on default_spec(j["experiment"]).
// Throws ConfigError on unknown keys or invalid values.
ExperimentSpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const ExperimentSpec& spec);
// Throws IoError if unreadable, ConfigError if malformed.
ExperimentSpec load_spec(const std::string& path);

struct ExperimentRecord {
  std::uint64_t seed = 0;
  std::string variant;
  std::string parameter;
  double parameter_value = 0.0;
  std::string metric;
  double value = 0.0;
  double runtime_ms = 0.0;
  // value is a wall-clock measurement.
  bool timing = false;
};

struct ExperimentReport {
  ExperimentSpec spec;
  std::vector<ExperimentRecord> records;
  // Per-variant / per-cell aggregates over seeds (non-timing).
  nlohmann::json summary;
  // Aggregates of timing metrics.
  nlohmann::json timing_summary;
  std::vector<std::string> notes;

  // Records matching every non-empty filter.
  std::vector<const ExperimentRecord*> select(const std::string& metric,
                                              const std::string& variant = "",
                                              const std::string& parameter = "") const;
};

ExperimentReport run_param_scaling(const ExperimentSpec& spec);
ExperimentReport run_rerank_tradeoff(const ExperimentSpec& spec);
ExperimentReport run_diversity(const ExperimentSpec& spec);
ExperimentReport run_uncertainty(const ExperimentSpec& spec);
ExperimentReport run_ab_offline(const ExperimentSpec& spec);
ExperimentReport run_stability(const ExperimentSpec& spec);
ExperimentReport run_multi_objective(const ExperimentSpec& spec);
ExperimentReport run_experiment(const ExperimentSpec& spec);

// CSV to `csv_path`, sidecar JSON next to it. Throws IoError.
void write_report(const ExperimentReport& report, const std::string& csv_path);
std::string report_csv(const ExperimentReport& report);
nlohmann::json report_json(const ExperimentReport& report);
std::string sidecar_path(const std::string& csv_path);

// Generated data shared by the cells of one experiment.
struct Dataset {
  std::vector<Listing> pool;
  std::vector<Impression> train;
  std::vector<Impression> test;
};
Dataset make_dataset(const DataConfig& config, std::uint64_t data_seed);

// Mean NDCG of `ranker` over `log`. Pairwise rankers rank alone; the others
// rerank every candidate on top of `first_stage`.
double evaluate_ndcg(const RankerVariant& ranker, const PairwiseRanker& first_stage,
                     const std::vector<Impression>& log);

// LTR_THREADS, default 1. Throws ConfigError on a non-positive value.
int experiment_threads();
// Runs fn(0..n-1) on experiment_threads() workers; fn writes its own slot.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace ltr

#endif  // LTR_EXPERIMENTS_H_
