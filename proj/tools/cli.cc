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

#include "cli.h"

#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>

#include "ltr/errors.h"
#include "ltr/experiments.h"
#include "ltr/marketplace.h"
#include "ltr/metrics.h"
#include "ltr/pipeline.h"
#include "ltr/random.h"
#include "ltr/serialization.h"
#include "ltr/training.h"

namespace ltr {
namespace {

struct GenerateArgs {
  int impressions = 1000;
  int candidates = 20;
  int pool = 1000;
  std::uint64_t seed = 1;
  std::string out;
};

struct TrainArgs {
  std::string variant = "pairwise";
  std::string log;
  std::uint64_t seed = 1;
  std::string out;
  std::string trace;
  int epochs = 0;
  double learning_rate = 0.0;
  int batch_size = 0;
  bool weighted = false;
  double alpha = 0.5;
};

struct EvaluateArgs {
  std::string model;
  std::string log;
  std::string first_stage;
  int top_k = 0;
};

struct ExperimentArgs {
  std::string spec;
  std::string name;
  std::string out;
};

int run_generate(const GenerateArgs& a) {
  DataConfig data;
  data.pool_size = a.pool;
  data.candidates = a.candidates;
  data.validate();
  const auto pool = generate_listings(a.pool, data.listings, mix_seed(a.seed, 1));
  const SearchLog log = generate_search_log(a.impressions, a.candidates, pool, data.choice,
                                            mix_seed(a.seed, 2), data.sampler);
  save_log(log.impressions, a.out);
  std::cout << nlohmann::json{{"impressions", log.impressions.size()},
                              {"skipped", log.skipped},
                              {"out", a.out}}
                   .dump()
            << "\n";
  return 0;
}

int run_train(const TrainArgs& a) {
  const VariantKind kind = variant_from_string(a.variant);
  const auto log = load_log(a.log);
  if (log.empty()) throw ValidationError("log '" + a.log + "' has no impressions");
  const ExperimentSpec defaults = default_spec(ExperimentKind::kUncertainty);
  const Schedule& schedule =
      kind == VariantKind::kPairwise ? defaults.first_stage : defaults.second_stage;
  TrainConfig config = defaults.train_config(schedule, a.seed);
  config.shape.listing_width = static_cast<int>(log.front().candidates.front().features.size());
  if (a.epochs > 0) config.epochs = a.epochs;
  if (a.learning_rate > 0.0) config.learning_rate = a.learning_rate;
  if (a.batch_size > 0) config.batch_size = a.batch_size;
  config.trip_quality_weighting = a.weighted;
  config.trip_quality_alpha = a.alpha;

  std::optional<PairwiseRanker> base;
  if (kind != VariantKind::kPairwise) {
    // The first stage keeps its own schedule; overrides apply to the
    // second stage only.
    TrainConfig first = defaults.train_config(defaults.first_stage, a.seed);
    first.shape = config.shape;
    first.trip_quality_weighting = a.weighted;
    first.trip_quality_alpha = a.alpha;
    base = std::get<PairwiseRanker>(
        train_variant(VariantKind::kPairwise, log, first).ranker.model);
  }
  const TrainResult result = train_variant(kind, log, config, base);
  save_ranker(result.ranker, a.out);
  const std::string trace = a.trace.empty() ? a.out + ".trace.csv" : a.trace;
  write_loss_trace(result.loss_trace, trace);
  std::cout << nlohmann::json{{"variant", to_string(kind)},
                              {"final_loss", result.loss_trace.back().mean_loss},
                              {"out", a.out},
                              {"trace", trace}}
                   .dump()
            << "\n";
  return 0;
}

int run_evaluate(const EvaluateArgs& a) {
  const RankerVariant ranker = load_ranker(a.model);
  const auto log = load_log(a.log);
  if (log.empty()) throw ValidationError("log '" + a.log + "' has no impressions");

  PipelineConfig pc;
  if (!a.first_stage.empty()) {
    const RankerVariant f = load_ranker(a.first_stage);
    if (f.kind != VariantKind::kPairwise) {
      throw ConfigError("--first-stage must be a pairwise model");
    }
    pc.first_stage = std::get<PairwiseRanker>(f.model);
  } else if (const auto* p = std::get_if<PairwiseRanker>(&ranker.model)) {
    pc.first_stage = *p;
  } else if (const auto* ap = std::get_if<AllPairwiseRanker>(&ranker.model)) {
    pc.first_stage = ap->base_f;
  } else if (const auto* at = std::get_if<AttentionRanker>(&ranker.model)) {
    pc.first_stage = at->base_f;
  } else {
    // A true-pairwise model without a first stage reranks every candidate;
    // the untrained first stage then only breaks exact ties.
    TrainConfig c;
    c.shape = ranker.shape();
    pc.first_stage = std::get<PairwiseRanker>(
        initial_ranker(VariantKind::kPairwise, c, std::nullopt).model);
  }
  std::size_t widest = 1;
  for (const Impression& imp : log) widest = std::max(widest, imp.candidates.size());
  if (ranker.kind != VariantKind::kPairwise) pc.second_stage = ranker;
  pc.rerank_top_k = a.top_k > 0 ? static_cast<std::size_t>(a.top_k) : widest;

  double total = 0.0;
  for (const Impression& imp : log) {
    const RankResult r = rank(pc, imp.query, imp.candidates);
    total += ndcg({r.ordering, static_cast<std::size_t>(imp.booked_index), {}});
  }
  std::cout << nlohmann::json{{"variant", to_string(ranker.kind)},
                              {"impressions", log.size()},
                              {"rerank_top_k", pc.rerank_top_k},
                              {"ndcg", total / static_cast<double>(log.size())}}
                   .dump()
            << "\n";
  return 0;
}

int run_experiment_command(const ExperimentArgs& a) {
  if (a.spec.empty() == a.name.empty()) {
    throw ConfigError("give exactly one of --spec or --name");
  }
  ExperimentSpec spec =
      a.spec.empty() ? default_spec(experiment_from_string(a.name)) : load_spec(a.spec);
  if (!a.out.empty()) spec.output_path = a.out;
  const ExperimentReport report = run_experiment(spec);
  write_report(report, spec.output_path);
  std::cout << nlohmann::json{{"experiment", to_string(spec.experiment)},
                              {"records", report.records.size()},
                              {"csv", spec.output_path},
                              {"json", sidecar_path(spec.output_path)},
                              {"summary", report.summary}}
                   .dump(2)
            << "\n";
  return 0;
}

int run_inspect(const std::string& model) {
  std::cout << ranker_metadata(load_ranker(model)).dump(2) << "\n";
  return 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Learning-to-rank toolkit: synthetic logs, training, evaluation, experiments"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Write a synthetic search log (JSONL)");
  generate->add_option("--impressions", gen.impressions, "Impressions to log")
      ->check(CLI::PositiveNumber);
  generate->add_option("--candidates", gen.candidates, "Candidates per impression")
      ->check(CLI::Range(2, 1000));
  generate->add_option("--pool", gen.pool, "Listing pool size")->check(CLI::PositiveNumber);
  generate->add_option("--seed", gen.seed, "Data seed");
  generate->add_option("--out", gen.out, "Output path")->required();

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Train a ranker on a log");
  train->add_option("--variant", tr.variant, "pairwise, true_pairwise_avg, true_pairwise_gbt, "
                                             "all_pairwise_apfn or all_pairwise_attn");
  train->add_option("--log", tr.log, "Training log (JSONL)")->required();
  train->add_option("--seed", tr.seed, "Model seed");
  train->add_option("--out", tr.out, "Model output path")->required();
  train->add_option("--trace", tr.trace, "Loss trace CSV (default <out>.trace.csv)");
  train->add_option("--epochs", tr.epochs, "Override epochs")->check(CLI::PositiveNumber);
  train->add_option("--learning-rate", tr.learning_rate, "Override learning rate")
      ->check(CLI::PositiveNumber);
  train->add_option("--batch-size", tr.batch_size, "Override batch size")
      ->check(CLI::PositiveNumber);
  train->add_flag("--weighted", tr.weighted, "Weight pairs by trip rating");
  train->add_option("--alpha", tr.alpha, "Trip-rating weight strength")
      ->check(CLI::NonNegativeNumber);

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Mean NDCG of a model over a log");
  evaluate->add_option("--model", ev.model, "Model file")->required();
  evaluate->add_option("--log", ev.log, "Evaluation log (JSONL)")->required();
  evaluate->add_option("--first-stage", ev.first_stage, "Pairwise first-stage model file");
  evaluate->add_option("--top-k", ev.top_k, "Rerank depth (default: all candidates)")
      ->check(CLI::PositiveNumber);

  ExperimentArgs ex;
  auto* experiment = app.add_subcommand("experiment", "Run an experiment and write its report");
  experiment->add_option("--spec", ex.spec, "Experiment spec (JSON)");
  experiment->add_option("--name", ex.name, "Run an experiment with default settings");
  experiment->add_option("--out", ex.out, "Override the report CSV path");

  std::string inspect_model;
  auto* inspect = app.add_subcommand("inspect", "Print model metadata");
  inspect->add_option("--model", inspect_model, "Model file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 2;
  }

  try {
    if (*generate) return run_generate(gen);
    if (*train) return run_train(tr);
    if (*evaluate) return run_evaluate(ev);
    if (*experiment) return run_experiment_command(ex);
    if (*inspect) return run_inspect(inspect_model);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace ltr
