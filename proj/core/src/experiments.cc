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

#include "ltr/experiments.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "ltr/errors.h"
#include "ltr/metrics.h"
#include "ltr/pipeline.h"
#include "ltr/random.h"

namespace ltr {

using nlohmann::json;

namespace {

constexpr std::pair<ExperimentKind, const char*> kExperimentNames[] = {
    {ExperimentKind::kParamScaling, "param_scaling"},
    {ExperimentKind::kRerankTradeoff, "rerank_tradeoff"},
    {ExperimentKind::kDiversity, "diversity"},
    {ExperimentKind::kUncertainty, "uncertainty"},
    {ExperimentKind::kAbOffline, "ab_offline"},
    {ExperimentKind::kStability, "stability"},
    {ExperimentKind::kMultiObjective, "multi_objective"},
};

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  for (const auto& [k, name] : kExperimentNames) {
    if (k == kind) return name;
  }
  throw ConfigError("unknown experiment kind");
}

ExperimentKind experiment_from_string(const std::string& name) {
  std::string key = name;
  std::replace(key.begin(), key.end(), '-', '_');
  for (const auto& [k, n] : kExperimentNames) {
    if (key == n) return k;
  }
  throw ConfigError("unknown experiment '" + name + "'");
}

void DataConfig::validate() const {
  listings.validate();
  choice.validate();
  if (pool_size < 1) throw ConfigError("pool_size must be >= 1");
  if (train_impressions < 1 || test_impressions < 1) {
    throw ConfigError("impression counts must be >= 1");
  }
  if (candidates < 2) throw ConfigError("candidates must be >= 2");
  if (candidates > pool_size) throw ConfigError("candidates exceeds pool_size");
  if (!(sampler.min_extent > 0.0) || sampler.max_extent < sampler.min_extent ||
      sampler.max_extent > 1.0) {
    throw ConfigError("sampler extents must satisfy 0 < min <= max <= 1");
  }
}

void ExperimentSpec::validate() const {
  data.validate();
  shape.validate();
  if (shape.listing_width != data.listings.feature_width) {
    throw ConfigError("shape.listing_width must equal the generated feature width");
  }
  if (model_seeds.empty()) throw ConfigError("model_seeds must not be empty");
  for (const Schedule* s : {&first_stage, &second_stage}) {
    if (s->epochs < 1 || !(s->learning_rate > 0.0) || s->batch_size < 1) {
      throw ConfigError("schedules need epochs >= 1, learning_rate > 0, batch_size >= 1");
    }
  }
  if (pairs_per_impression < 0) throw ConfigError("pairs_per_impression must be >= 0");
  if (variants.empty()) throw ConfigError("variants must not be empty");
  if (experiment == ExperimentKind::kParamScaling && width_sweep.empty()) {
    throw ConfigError("param_scaling needs a width_sweep");
  }
  for (const auto& w : width_sweep) {
    if (w.empty()) throw ConfigError("width_sweep entries need at least one layer");
    for (int v : w) {
      if (v < 1) throw ConfigError("widths must be positive");
    }
  }
  if ((experiment == ExperimentKind::kRerankTradeoff ||
       experiment == ExperimentKind::kDiversity) &&
      rerank_ks.empty()) {
    throw ConfigError("rerank_ks must not be empty");
  }
  for (int k : rerank_ks) {
    if (k < 1) throw ConfigError("rerank_ks must be >= 1");
  }
  if (rerank_top_k < 1) throw ConfigError("rerank_top_k must be >= 1");
  if (page_size < 1 || page_size > data.candidates) {
    throw ConfigError("page_size must be in [1, candidates]");
  }
  if (stability_queries < 1 || jitters_per_query < 1) {
    throw ConfigError("stability needs >= 1 query and jitter");
  }
  if (jitter_magnitude < 0.0) throw ConfigError("jitter_magnitude must be >= 0");
  if (trip_quality_alpha < 0.0) throw ConfigError("trip_quality_alpha must be >= 0");
  if (latency_repeats < 1) throw ConfigError("latency_repeats must be >= 1");
  if (second_stage_variant == VariantKind::kPairwise) {
    throw ConfigError("second_stage_variant must not be pairwise");
  }
}

TrainConfig ExperimentSpec::train_config(const Schedule& schedule,
                                         std::uint64_t seed) const {
  TrainConfig c;
  c.epochs = schedule.epochs;
  c.learning_rate = schedule.learning_rate;
  c.batch_size = schedule.batch_size;
  c.optimizer = OptimizerAlgorithm::kAdam;
  c.init_seed = seed;
  c.shuffle_seed = mix_seed(seed, 0x5u);
  c.pairs_per_impression = pairs_per_impression;
  c.trip_quality_alpha = trip_quality_alpha;
  c.shape = shape;
  return c;
}

// ---------------------------------------------------------------------------
// Defaults

ExperimentSpec default_spec(ExperimentKind kind) {
  ExperimentSpec s;
  s.experiment = kind;
  s.model_seeds = {1, 2, 3, 4, 5};
  s.first_stage = {20, 2e-3, 1};
  s.second_stage = {30, 1e-3, 4};
  s.variants.assign(std::begin(kAllVariants), std::end(kAllVariants));
  s.output_path = "reports/" + to_string(kind) + ".csv";
  switch (kind) {
    case ExperimentKind::kParamScaling:
      s.width_sweep = {{8}, {32, 16}, {64, 32}};
      s.data.train_impressions = 1200;
      s.data.test_impressions = 500;
      break;
    case ExperimentKind::kRerankTradeoff:
    case ExperimentKind::kDiversity:
      s.data.candidates = 60;
      s.data.train_impressions = 800;
      s.data.test_impressions = 300;
      s.rerank_ks = {1, 5, 10, 20, 40, 60};
      s.variants = {VariantKind::kPairwise, s.second_stage_variant};
      break;
    case ExperimentKind::kUncertainty:
      s.model_seeds = {1, 2, 3, 4, 5, 6, 7, 8};
      break;
    case ExperimentKind::kAbOffline:
      s.variants = {VariantKind::kPairwise, s.second_stage_variant};
      break;
    case ExperimentKind::kStability:
    case ExperimentKind::kMultiObjective:
      s.variants = {VariantKind::kPairwise, VariantKind::kAllPairwiseApfn};
      break;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Spec JSON

namespace {

json listings_to_json(const ListingGeneratorConfig& c) {
  return {{"feature_width", c.feature_width},
          {"cluster_size", c.cluster_size},
          {"price_mu", c.price_mu},
          {"price_cluster_sigma", c.price_cluster_sigma},
          {"price_within_sigma", c.price_within_sigma},
          {"location_spread", c.location_spread},
          {"quality_alpha", c.quality_alpha},
          {"quality_beta", c.quality_beta},
          {"quality_jitter", c.quality_jitter},
          {"quality_observation_noise", c.quality_observation_noise},
          {"amenity_jitter", c.amenity_jitter},
          {"appeal_sigma", c.appeal_sigma}};
}

ListingGeneratorConfig listings_from_json(const json& j) {
  ListingGeneratorConfig c;
  c.feature_width = j.at("feature_width").get<int>();
  c.cluster_size = j.at("cluster_size").get<int>();
  c.price_mu = j.at("price_mu").get<double>();
  c.price_cluster_sigma = j.at("price_cluster_sigma").get<double>();
  c.price_within_sigma = j.at("price_within_sigma").get<double>();
  c.location_spread = j.at("location_spread").get<double>();
  c.quality_alpha = j.at("quality_alpha").get<double>();
  c.quality_beta = j.at("quality_beta").get<double>();
  c.quality_jitter = j.at("quality_jitter").get<double>();
  c.quality_observation_noise = j.at("quality_observation_noise").get<double>();
  c.amenity_jitter = j.at("amenity_jitter").get<double>();
  c.appeal_sigma = j.at("appeal_sigma").get<double>();
  return c;
}

json choice_to_json(const ChoiceModelConfig& c) {
  return {{"utility_weights", c.utility_weights},
          {"similarity_penalty", c.similarity_penalty},
          {"temperature", c.temperature},
          {"rating_noise", c.rating_noise},
          {"similarity_bandwidth", c.similarity_bandwidth},
          {"guests_amenity", c.guests_amenity},
          {"trip_price", c.trip_price}};
}

ChoiceModelConfig choice_from_json(const json& j) {
  ChoiceModelConfig c;
  c.utility_weights = j.at("utility_weights").get<std::vector<double>>();
  c.similarity_penalty = j.at("similarity_penalty").get<double>();
  c.temperature = j.at("temperature").get<double>();
  c.rating_noise = j.at("rating_noise").get<double>();
  c.similarity_bandwidth = j.at("similarity_bandwidth").get<double>();
  c.guests_amenity = j.at("guests_amenity").get<double>();
  c.trip_price = j.at("trip_price").get<double>();
  return c;
}

json schedule_to_json(const Schedule& s) {
  return {{"epochs", s.epochs}, {"learning_rate", s.learning_rate},
          {"batch_size", s.batch_size}};
}

Schedule schedule_from_json(const json& j) {
  return {j.at("epochs").get<int>(), j.at("learning_rate").get<double>(),
          j.at("batch_size").get<int>()};
}

json variants_to_json(const std::vector<VariantKind>& v) {
  json out = json::array();
  for (VariantKind k : v) out.push_back(to_string(k));
  return out;
}

// Every key of `patch` must exist in `base`, recursively through objects.
void check_known_keys(const json& base, const json& patch, const std::string& where) {
  if (!patch.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : patch.items()) {
    if (!base.contains(key)) throw ConfigError("unknown spec key '" + where + key + "'");
    if (base.at(key).is_object()) check_known_keys(base.at(key), value, where + key + ".");
  }
}

}  // namespace

json spec_to_json(const ExperimentSpec& s) {
  return {{"experiment", to_string(s.experiment)},
          {"data_seed", s.data_seed},
          {"model_seeds", s.model_seeds},
          {"data",
           {{"pool_size", s.data.pool_size},
            {"train_impressions", s.data.train_impressions},
            {"test_impressions", s.data.test_impressions},
            {"candidates", s.data.candidates},
            {"listings", listings_to_json(s.data.listings)},
            {"choice", choice_to_json(s.data.choice)},
            {"sampler",
             {{"min_extent", s.data.sampler.min_extent},
              {"max_extent", s.data.sampler.max_extent}}}}},
          {"shape",
           {{"hidden", s.shape.hidden},
            {"feature_hidden", s.shape.feature_hidden},
            {"feature_width", s.shape.feature_width},
            {"embedding_width", s.shape.embedding_width},
            {"activation", to_string(s.shape.activation)}}},
          {"first_stage", schedule_to_json(s.first_stage)},
          {"second_stage", schedule_to_json(s.second_stage)},
          {"pairs_per_impression", s.pairs_per_impression},
          {"variants", variants_to_json(s.variants)},
          {"width_sweep", s.width_sweep},
          {"rerank_ks", s.rerank_ks},
          {"second_stage_variant", to_string(s.second_stage_variant)},
          {"rerank_top_k", s.rerank_top_k},
          {"page_size", s.page_size},
          {"stability_queries", s.stability_queries},
          {"jitters_per_query", s.jitters_per_query},
          {"jitter_magnitude", s.jitter_magnitude},
          {"trip_quality_alpha", s.trip_quality_alpha},
          {"latency_repeats", s.latency_repeats},
          {"output_path", s.output_path}};
}

ExperimentSpec spec_from_json(const json& j) {
  if (!j.is_object() || !j.contains("experiment")) {
    throw ConfigError("spec must be an object with an 'experiment' field");
  }
  try {
    const ExperimentKind kind = experiment_from_string(j.at("experiment").get<std::string>());
    json full = spec_to_json(default_spec(kind));
    check_known_keys(full, j, "");
    full.merge_patch(j);

    ExperimentSpec s;
    s.experiment = kind;
    s.data_seed = full.at("data_seed").get<std::uint64_t>();
    s.model_seeds = full.at("model_seeds").get<std::vector<std::uint64_t>>();
    const json& d = full.at("data");
    s.data.pool_size = d.at("pool_size").get<int>();
    s.data.train_impressions = d.at("train_impressions").get<int>();
    s.data.test_impressions = d.at("test_impressions").get<int>();
    s.data.candidates = d.at("candidates").get<int>();
    s.data.listings = listings_from_json(d.at("listings"));
    s.data.choice = choice_from_json(d.at("choice"));
    s.data.sampler.min_extent = d.at("sampler").at("min_extent").get<double>();
    s.data.sampler.max_extent = d.at("sampler").at("max_extent").get<double>();
    const json& sh = full.at("shape");
    s.shape.listing_width = s.data.listings.feature_width;
    s.shape.hidden = sh.at("hidden").get<std::vector<int>>();
    s.shape.feature_hidden = sh.at("feature_hidden").get<std::vector<int>>();
    s.shape.feature_width = sh.at("feature_width").get<int>();
    s.shape.embedding_width = sh.at("embedding_width").get<int>();
    s.shape.activation = activation_from_string(sh.at("activation").get<std::string>());
    s.first_stage = schedule_from_json(full.at("first_stage"));
    s.second_stage = schedule_from_json(full.at("second_stage"));
    s.pairs_per_impression = full.at("pairs_per_impression").get<int>();
    s.variants.clear();
    for (const json& v : full.at("variants")) {
      s.variants.push_back(variant_from_string(v.get<std::string>()));
    }
    s.width_sweep = full.at("width_sweep").get<std::vector<std::vector<int>>>();
    s.rerank_ks = full.at("rerank_ks").get<std::vector<int>>();
    s.second_stage_variant =
        variant_from_string(full.at("second_stage_variant").get<std::string>());
    s.rerank_top_k = full.at("rerank_top_k").get<int>();
    s.page_size = full.at("page_size").get<int>();
    s.stability_queries = full.at("stability_queries").get<int>();
    s.jitters_per_query = full.at("jitters_per_query").get<int>();
    s.jitter_magnitude = full.at("jitter_magnitude").get<double>();
    s.trip_quality_alpha = full.at("trip_quality_alpha").get<double>();
    s.latency_repeats = full.at("latency_repeats").get<int>();
    s.output_path = full.at("output_path").get<std::string>();
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed spec: ") + e.what());
  }
}

ExperimentSpec load_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open spec '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::exception& e) {
    throw ConfigError("spec '" + path + "' is not valid JSON: " + e.what());
  }
  return spec_from_json(j);
}

// ---------------------------------------------------------------------------
// Shared machinery

int experiment_threads() {
  const char* env = std::getenv("LTR_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1 || n > 1024) {
    throw ConfigError(std::string("LTR_THREADS must be a positive integer, got '") + env + "'");
  }
  return static_cast<int>(n);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::min<std::size_t>(n, static_cast<std::size_t>(experiment_threads()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::mutex mu;
  std::size_t next = 0;
  std::exception_ptr failure;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i;
        {
          std::lock_guard<std::mutex> lock(mu);
          if (next >= n || failure) return;
          i = next++;
        }
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

Dataset make_dataset(const DataConfig& config, std::uint64_t data_seed) {
  config.validate();
  Dataset d;
  d.pool = generate_listings(config.pool_size, config.listings, mix_seed(data_seed, 1));
  d.train = generate_search_log(config.train_impressions, config.candidates, d.pool,
                                config.choice, mix_seed(data_seed, 2), config.sampler)
                .impressions;
  d.test = generate_search_log(config.test_impressions, config.candidates, d.pool,
                               config.choice, mix_seed(data_seed, 3), config.sampler)
               .impressions;
  return d;
}

namespace {

PipelineConfig pipeline_for(const RankerVariant& ranker, const PairwiseRanker& first_stage,
                            std::size_t top_k) {
  PipelineConfig pc;
  if (ranker.kind == VariantKind::kPairwise) {
    pc.first_stage = std::get<PairwiseRanker>(ranker.model);
  } else {
    pc.first_stage = first_stage;
    pc.second_stage = ranker;
  }
  pc.rerank_top_k = top_k;
  return pc;
}

double mean_ndcg(const PipelineConfig& pc, const std::vector<Impression>& log) {
  double total = 0.0;
  for (const Impression& imp : log) {
    const RankResult r = rank(pc, imp.query, imp.candidates);
    total += ndcg({r.ordering, static_cast<std::size_t>(imp.booked_index), {}});
  }
  return total / static_cast<double>(log.size());
}

}  // namespace

double evaluate_ndcg(const RankerVariant& ranker, const PairwiseRanker& first_stage,
                     const std::vector<Impression>& log) {
  if (log.empty()) throw ValidationError("cannot evaluate on an empty log");
  std::size_t widest = 1;
  for (const Impression& imp : log) widest = std::max(widest, imp.candidates.size());
  return mean_ndcg(pipeline_for(ranker, first_stage, widest), log);
}

namespace {

// Models of one seed, trained lazily and shared between variants that train
// identically (the two true-pairwise aggregations share h).
class SeedModels {
 public:
  SeedModels(const ExperimentSpec& spec, const Dataset& data, std::uint64_t seed,
             bool weighted = false)
      : spec_(spec), data_(data), seed_(seed), weighted_(weighted) {}

  const PairwiseRanker& first_stage() {
    if (!first_stage_) {
      const auto start = Clock::now();
      TrainConfig c = config(spec_.first_stage);
      first_stage_ = std::get<PairwiseRanker>(
          train_variant(VariantKind::kPairwise, data_.train, c).ranker.model);
      first_stage_ms_ = elapsed_ms(start);
    }
    return *first_stage_;
  }

  // The trained ranker for `kind` and its training time (first stage included
  // for pairwise only).
  std::pair<RankerVariant, double> get(VariantKind kind, bool residual = true) {
    if (kind == VariantKind::kPairwise) {
      const PairwiseRanker& f = first_stage();
      return {RankerVariant{kind, f}, first_stage_ms_};
    }
    const VariantKind train_kind =
        is_true_pairwise(kind) ? VariantKind::kTruePairwiseGbt : kind;
    const auto key = std::make_pair(train_kind, residual);
    auto it = cache_.find(key);
    if (it == cache_.end()) {
      const PairwiseRanker& f = first_stage();
      const auto start = Clock::now();
      TrainConfig c = config(spec_.second_stage);
      c.residual = residual;
      RankerVariant r = train_variant(train_kind, data_.train, c, f).ranker;
      it = cache_.emplace(key, std::make_pair(std::move(r), elapsed_ms(start))).first;
    }
    RankerVariant out = it->second.first;
    out.kind = kind;
    return {out, it->second.second};
  }

 private:
  TrainConfig config(const Schedule& s) const {
    TrainConfig c = spec_.train_config(s, seed_);
    c.trip_quality_weighting = weighted_;
    return c;
  }

  const ExperimentSpec& spec_;
  const Dataset& data_;
  std::uint64_t seed_;
  bool weighted_;
  std::optional<PairwiseRanker> first_stage_;
  double first_stage_ms_ = 0.0;
  std::map<std::pair<VariantKind, bool>, std::pair<RankerVariant, double>> cache_;
};

// Runs one cell per seed (in parallel when allowed) and concatenates the
// records in seed order.
std::vector<ExperimentRecord> per_seed(
    const ExperimentSpec& spec,
    const std::function<std::vector<ExperimentRecord>(std::uint64_t)>& cell) {
  std::vector<std::vector<ExperimentRecord>> parts(spec.model_seeds.size());
  parallel_for(parts.size(), [&](std::size_t i) { parts[i] = cell(spec.model_seeds[i]); });
  std::vector<ExperimentRecord> out;
  for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

ExperimentRecord record(std::uint64_t seed, const std::string& variant,
                        const std::string& parameter, double parameter_value,
                        const std::string& metric, double value, double runtime_ms = 0.0,
                        bool timing = false) {
  return {seed, variant, parameter, parameter_value, metric, value, runtime_ms, timing};
}

std::vector<double> values_of(const std::vector<const ExperimentRecord*>& rows) {
  std::vector<double> v;
  v.reserve(rows.size());
  for (const ExperimentRecord* r : rows) v.push_back(r->value);
  return v;
}

json mean_sd(const std::vector<double>& v) {
  json out = {{"mean", mean(v)}, {"n", v.size()}};
  if (v.size() > 1) {
    out["stddev"] = stddev(v);
  } else {
    out["stddev_absent"] = "fewer than two seeds";
  }
  return out;
}

std::string param_key(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

// summary[variant][parameter_value] = mean_sd over seeds of `metric`.
json summarize_by_parameter(const std::vector<ExperimentRecord>& records,
                            const std::string& metric) {
  std::map<std::string, std::map<double, std::vector<double>>> groups;
  for (const ExperimentRecord& r : records) {
    if (r.metric == metric) groups[r.variant][r.parameter_value].push_back(r.value);
  }
  json out = json::object();
  for (const auto& [variant, by_param] : groups) {
    for (const auto& [p, values] : by_param) out[variant][param_key(p)] = mean_sd(values);
  }
  return out;
}

ExperimentReport make_report(const ExperimentSpec& spec) {
  spec.validate();
  ExperimentReport report;
  report.spec = spec;
  report.summary = json::object();
  report.timing_summary = json::object();
  return report;
}

}  // namespace

std::vector<const ExperimentRecord*> ExperimentReport::select(
    const std::string& metric, const std::string& variant,
    const std::string& parameter) const {
  std::vector<const ExperimentRecord*> out;
  for (const ExperimentRecord& r : records) {
    if (!metric.empty() && r.metric != metric) continue;
    if (!variant.empty() && r.variant != variant) continue;
    if (!parameter.empty() && r.parameter != parameter) continue;
    out.push_back(&r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Experiments

ExperimentReport run_param_scaling(const ExperimentSpec& spec) {
  ExperimentReport report = make_report(spec);
  const Dataset data = make_dataset(spec.data, spec.data_seed);
  report.records = per_seed(spec, [&](std::uint64_t seed) {
    std::vector<ExperimentRecord> out;
    for (std::size_t w = 0; w < spec.width_sweep.size(); ++w) {
      ExperimentSpec cell = spec;
      cell.shape.hidden = spec.width_sweep[w];
      SeedModels models(cell, data, seed);
      for (VariantKind kind : spec.variants) {
        const std::string name = to_string(kind);
        try {
          auto [ranker, ms] = models.get(kind);
          const double ndcg_value = evaluate_ndcg(ranker, models.first_stage(), data.test);
          const auto params = static_cast<double>(ranker.parameter_count());
          out.push_back(record(seed, name, "sweep_index", static_cast<double>(w), "ndcg",
                               ndcg_value, ms));
          out.push_back(record(seed, name, "sweep_index", static_cast<double>(w),
                               "parameter_count", params));
        } catch (const DivergenceError& e) {
          out.push_back(record(seed, name, "sweep_index", static_cast<double>(w),
                               "diverged_at_step", static_cast<double>(e.step())));
        }
      }
    }
    return out;
  });
  report.summary["ndcg"] = summarize_by_parameter(report.records, "ndcg");
  report.summary["parameter_count"] = summarize_by_parameter(report.records, "parameter_count");
  json widths = json::array();
  for (const auto& w : spec.width_sweep) widths.push_back(w);
  report.summary["width_sweep"] = widths;
  return report;
}

namespace {

// NDCG and fastest mean per-impression rank() latency for one rerank depth.
struct RerankCell {
  double ndcg = 0.0;
  double latency_ms = 0.0;
  double diversity = 0.0;
};

RerankCell rerank_cell(const PipelineConfig& pc, const std::vector<Impression>& log,
                       int repeats, std::size_t page_size) {
  RerankCell cell;
  double best = std::numeric_limits<double>::infinity();
  for (int rep = 0; rep < repeats; ++rep) {
    double ndcg_total = 0.0;
    double diversity_total = 0.0;
    double ms = 0.0;
    for (const Impression& imp : log) {
      const auto start = Clock::now();
      const RankResult r = rank(pc, imp.query, imp.candidates);
      ms += elapsed_ms(start);
      RankedImpression ri{r.ordering, static_cast<std::size_t>(imp.booked_index), {}};
      ndcg_total += ndcg(ri);
      for (const Listing& l : imp.candidates) ri.prices.push_back(l.price());
      diversity_total += price_variance_diversity(ranked_prices(ri), page_size);
    }
    const double n = static_cast<double>(log.size());
    cell.ndcg = ndcg_total / n;
    cell.diversity = diversity_total / n;
    best = std::min(best, ms / n);
  }
  cell.latency_ms = best;
  return cell;
}

}  // namespace

ExperimentReport run_rerank_tradeoff(const ExperimentSpec& spec) {
  ExperimentReport report = make_report(spec);
  const Dataset data = make_dataset(spec.data, spec.data_seed);
  const std::string name = to_string(spec.second_stage_variant);
  report.records = per_seed(spec, [&](std::uint64_t seed) {
    std::vector<ExperimentRecord> out;
    SeedModels models(spec, data, seed);
    auto [ranker, ms] = models.get(spec.second_stage_variant);
    double base_ndcg = 0.0;
    double base_latency = 0.0;
    for (std::size_t i = 0; i < spec.rerank_ks.size(); ++i) {
      const auto k = static_cast<std::size_t>(spec.rerank_ks[i]);
      const PipelineConfig pc = pipeline_for(ranker, models.first_stage(), k);
      const RerankCell cell =
          rerank_cell(pc, data.test, spec.latency_repeats,
                      static_cast<std::size_t>(spec.page_size));
      if (i == 0) {
        base_ndcg = cell.ndcg;
        base_latency = cell.latency_ms;
      }
      const double kd = static_cast<double>(k);
      out.push_back(record(seed, name, "rerank_top_k", kd, "ndcg", cell.ndcg, ms));
      out.push_back(record(seed, name, "rerank_top_k", kd, "ndcg_pct_change",
                           100.0 * (cell.ndcg - base_ndcg) / base_ndcg));
      out.push_back(record(seed, name, "rerank_top_k", kd, "latency_ms", cell.latency_ms,
                           0.0, true));
      out.push_back(record(seed, name, "rerank_top_k", kd, "latency_pct_change",
                           100.0 * (cell.latency_ms - base_latency) / base_latency, 0.0,
                           true));
    }
    return out;
  });
  report.summary["ndcg"] = summarize_by_parameter(report.records, "ndcg");
  report.summary["ndcg_pct_change"] = summarize_by_parameter(report.records, "ndcg_pct_change");
  report.timing_summary["latency_ms"] = summarize_by_parameter(report.records, "latency_ms");
  report.timing_summary["latency_pct_change"] =
      summarize_by_parameter(report.records, "latency_pct_change");
  report.notes.push_back("baseline for percentage changes is the first rerank_ks entry");
  return report;
}

ExperimentReport run_diversity(const ExperimentSpec& spec) {
  ExperimentReport report = make_report(spec);
  const Dataset data = make_dataset(spec.data, spec.data_seed);
  report.records = per_seed(spec, [&](std::uint64_t seed) {
    std::vector<ExperimentRecord> out;
    SeedModels models(spec, data, seed);
    for (VariantKind kind : {VariantKind::kPairwise, spec.second_stage_variant}) {
      auto [ranker, ms] = models.get(kind);
      for (int k : spec.rerank_ks) {
        const PipelineConfig pc =
            pipeline_for(ranker, models.first_stage(), static_cast<std::size_t>(k));
        const RerankCell cell =
            rerank_cell(pc, data.test, 1, static_cast<std::size_t>(spec.page_size));
        out.push_back(record(seed, to_string(kind), "rerank_top_k", k,
                             "price_variance_diversity", cell.diversity, ms));
        out.push_back(record(seed, to_string(kind), "rerank_top_k", k, "ndcg", cell.ndcg));
      }
    }
    return out;
  });
  report.summary["price_variance_diversity"] =
      summarize_by_parameter(report.records, "price_variance_diversity");
  report.summary["ndcg"] = summarize_by_parameter(report.records, "ndcg");
  return report;
}

ExperimentReport run_uncertainty(const ExperimentSpec& spec) {
  ExperimentReport report = make_report(spec);
  const Dataset data = make_dataset(spec.data, spec.data_seed);
  report.records = per_seed(spec, [&](std::uint64_t seed) {
    std::vector<ExperimentRecord> out;
    SeedModels models(spec, data, seed);
    for (VariantKind kind : spec.variants) {
      auto [ranker, ms] = models.get(kind);
      out.push_back(record(seed, to_string(kind), "seed", static_cast<double>(seed), "ndcg",
                           evaluate_ndcg(ranker, models.first_stage(), data.test), ms));
    }
    return out;
  });
  json per_variant = json::object();
  for (VariantKind kind : spec.variants) {
    per_variant[to_string(kind)] =
        mean_sd(values_of(report.select("ndcg", to_string(kind))));
  }
  report.summary["ndcg"] = per_variant;
  if (spec.model_seeds.size() < 2) {
    report.notes.push_back("stddev absent: a single seed was given");
  }
  return report;
}

ExperimentReport run_ab_offline(const ExperimentSpec& spec) {
  ExperimentReport report = make_report(spec);
  const Dataset data = make_dataset(spec.data, spec.data_seed);
  const auto top_k = static_cast<std::size_t>(spec.rerank_top_k);
  report.records = per_seed(spec, [&](std::uint64_t seed) {
    std::vector<ExperimentRecord> out;
    SeedModels models(spec, data, seed);
    auto [treatment, ms] = models.get(spec.second_stage_variant);
    const double control = mean_ndcg(pipeline_for(RankerVariant{VariantKind::kPairwise,
                                                                models.first_stage()},
                                                   models.first_stage(), top_k),
                                      data.test);
    const double treated =
        mean_ndcg(pipeline_for(treatment, models.first_stage(), top_k), data.test);
    out.push_back(record(seed, "control", "rerank_top_k", spec.rerank_top_k, "ndcg", control));
    out.push_back(record(seed, to_string(spec.second_stage_variant), "rerank_top_k",
                         spec.rerank_top_k, "ndcg", treated, ms));
    out.push_back(record(seed, to_string(spec.second_stage_variant), "rerank_top_k",
                         spec.rerank_top_k, "ndcg_lift_pct",
                         100.0 * (treated - control) / control));
    return out;
  });
  report.summary["ndcg"] = summarize_by_parameter(report.records, "ndcg");
  report.summary["ndcg_lift_pct"] = summarize_by_parameter(report.records, "ndcg_lift_pct");
  report.notes.push_back(
      "offline held-out comparison only; offline NDCG is not a substitute for an online "
      "A/B test");
  return report;
}

namespace {

std::vector<std::int64_t> ranked_ids(const PipelineConfig& pc, const Query& query,
                                     const std::vector<Listing>& candidates) {
  const RankResult r = rank(pc, query, candidates);
  std::vector<std::int64_t> ids;
  ids.reserve(r.ordering.size());
  for (std::size_t c : r.ordering) ids.push_back(candidates[c].id);
  return ids;
}

}  // namespace

ExperimentReport run_stability(const ExperimentSpec& spec) {
  ExperimentReport report = make_report(spec);
  const Dataset data = make_dataset(spec.data, spec.data_seed);
  const auto page = static_cast<std::size_t>(spec.page_size);
  const auto n = static_cast<std::size_t>(spec.data.candidates);
  const std::size_t queries =
      std::min(data.test.size(), static_cast<std::size_t>(spec.stability_queries));
  const std::string variant = to_string(spec.second_stage_variant);
  report.records = per_seed(spec, [&](std::uint64_t seed) {
    SeedModels models(spec, data, seed);
    const PairwiseRanker& f = models.first_stage();
    const auto [residual, residual_ms] = models.get(spec.second_stage_variant, true);
    const auto [ablation, ablation_ms] = models.get(spec.second_stage_variant, false);
    struct Arm {
      std::string name;
      PipelineConfig pipeline;
      double ms;
      double flips = 0.0;
    };
    std::vector<Arm> arms = {
        {"pairwise", pipeline_for(RankerVariant{VariantKind::kPairwise, f}, f, n), 0.0},
        {variant + "_residual", pipeline_for(residual, f, n), residual_ms},
        {variant + "_nonresidual", pipeline_for(ablation, f, n), ablation_ms},
    };
    std::size_t trials = 0;
    for (std::size_t q = 0; q < queries; ++q) {
      const Impression& imp = data.test[q];
      std::vector<std::vector<std::int64_t>> original;
      for (const Arm& arm : arms) {
        original.push_back(ranked_ids(arm.pipeline, imp.query, imp.candidates));
      }
      for (int j = 0; j < spec.jitters_per_query; ++j) {
        Query jittered;
        try {
          jittered = jitter_query(imp.query, spec.jitter_magnitude,
                                  mix_seed(imp.query.seed, static_cast<std::uint64_t>(j) + 1));
        } catch (const NumericError&) {
          continue;
        }
        const auto candidates = retrieve_candidates(jittered, data.pool, spec.data.candidates);
        if (!candidates) continue;
        ++trials;
        for (std::size_t a = 0; a < arms.size(); ++a) {
          const auto ids = ranked_ids(arms[a].pipeline, jittered, *candidates);
          arms[a].flips += static_cast<double>(count_flips(original[a], ids, page));
        }
      }
    }
    std::vector<ExperimentRecord> out;
    const double denom = static_cast<double>(std::max<std::size_t>(trials, 1));
    for (const Arm& arm : arms) {
      out.push_back(record(seed, arm.name, "page_size", spec.page_size, "mean_flips",
                           arm.flips / denom, arm.ms));
    }
    const double res = arms[1].flips / denom;
    const double non = arms[2].flips / denom;
    out.push_back(record(seed, variant, "page_size", spec.page_size, "flip_reduction_pct",
                         non > 0.0 ? 100.0 * (non - res) / non : 0.0));
    out.push_back(record(seed, variant, "page_size", spec.page_size, "jitter_trials",
                         static_cast<double>(trials)));
    return out;
  });
  json flips = json::object();
  for (const std::string& arm :
       {std::string("pairwise"), variant + "_residual", variant + "_nonresidual"}) {
    flips[arm] = mean_sd(values_of(report.select("mean_flips", arm)));
  }
  report.summary["mean_flips"] = flips;
  const double res = flips[variant + "_residual"]["mean"].get<double>();
  const double non = flips[variant + "_nonresidual"]["mean"].get<double>();
  report.summary["flip_reduction_pct"] = non > 0.0 ? 100.0 * (non - res) / non : 0.0;
  return report;
}

namespace {

// Mean over impressions of the expected trip rating of the top `k` shown.
double top_k_rating(const PipelineConfig& pc, const std::vector<Impression>& log,
                    std::size_t k) {
  double total = 0.0;
  for (const Impression& imp : log) {
    const RankResult r = rank(pc, imp.query, imp.candidates);
    const std::size_t shown = std::min(k, r.ordering.size());
    double s = 0.0;
    for (std::size_t p = 0; p < shown; ++p) {
      s += expected_trip_rating(imp.candidates[r.ordering[p]]);
    }
    total += s / static_cast<double>(shown);
  }
  return total / static_cast<double>(log.size());
}

// Mean 1-based display position of listings whose expected rating is at
// least 4.5 ("five-star" listings); impressions without one are skipped.
double five_star_position(const PipelineConfig& pc, const std::vector<Impression>& log) {
  double total = 0.0;
  std::size_t count = 0;
  for (const Impression& imp : log) {
    const RankResult r = rank(pc, imp.query, imp.candidates);
    for (std::size_t p = 0; p < r.ordering.size(); ++p) {
      if (expected_trip_rating(imp.candidates[r.ordering[p]]) >= 4.5) {
        total += static_cast<double>(p + 1);
        ++count;
      }
    }
  }
  return count > 0 ? total / static_cast<double>(count) : 0.0;
}

}  // namespace

ExperimentReport run_multi_objective(const ExperimentSpec& spec) {
  ExperimentReport report = make_report(spec);
  const Dataset data = make_dataset(spec.data, spec.data_seed);
  const auto n = static_cast<std::size_t>(spec.data.candidates);
  const VariantKind kind = spec.second_stage_variant;
  report.records = per_seed(spec, [&](std::uint64_t seed) {
    std::vector<ExperimentRecord> out;
    for (const bool weighted : {false, true}) {
      SeedModels models(spec, data, seed, weighted);
      auto [ranker, ms] = models.get(kind);
      const PipelineConfig pc = pipeline_for(ranker, models.first_stage(), n);
      const double w = weighted ? 1.0 : 0.0;
      out.push_back(record(seed, to_string(kind), "trip_quality_weighting", w, "ndcg",
                           mean_ndcg(pc, data.test), ms));
      out.push_back(record(seed, to_string(kind), "trip_quality_weighting", w,
                           "top3_trip_rating", top_k_rating(pc, data.test, 3)));
      out.push_back(record(seed, to_string(kind), "trip_quality_weighting", w,
                           "five_star_mean_position", five_star_position(pc, data.test)));
    }
    return out;
  });
  for (const char* metric : {"ndcg", "top3_trip_rating", "five_star_mean_position"}) {
    report.summary[metric] = summarize_by_parameter(report.records, metric);
  }
  report.notes.push_back("trip rating of a shown listing is its expected rating 1 + 4 * quality");
  return report;
}

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  switch (spec.experiment) {
    case ExperimentKind::kParamScaling:
      return run_param_scaling(spec);
    case ExperimentKind::kRerankTradeoff:
      return run_rerank_tradeoff(spec);
    case ExperimentKind::kDiversity:
      return run_diversity(spec);
    case ExperimentKind::kUncertainty:
      return run_uncertainty(spec);
    case ExperimentKind::kAbOffline:
      return run_ab_offline(spec);
    case ExperimentKind::kStability:
      return run_stability(spec);
    case ExperimentKind::kMultiObjective:
      return run_multi_objective(spec);
  }
  throw ConfigError("unknown experiment kind");
}

// ---------------------------------------------------------------------------
// Report output

std::string report_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out << "experiment,seed,variant,parameter,parameter_value,metric,value,runtime_ms,timing\n";
  const std::string experiment = to_string(report.spec.experiment);
  for (const ExperimentRecord& r : report.records) {
    out << experiment << ',' << r.seed << ',' << r.variant << ',' << r.parameter << ','
        << format_double(r.parameter_value) << ',' << r.metric << ','
        << format_double(r.value) << ',' << format_double(r.runtime_ms) << ','
        << (r.timing ? 1 : 0) << '\n';
  }
  return out.str();
}

json report_json(const ExperimentReport& report) {
  return {{"spec", spec_to_json(report.spec)},
          {"environment",
           {{"artifact_version", kArtifactVersion},
            {"compiler", __VERSION__},
            {"cxx_standard", static_cast<long>(__cplusplus)},
            {"threads", experiment_threads()},
            {"tolerances",
             {{"permutation_invariance_relative", 1e-9},
              {"collinearity_absolute", 1e-12},
              {"gbt_oracle_absolute", 1e-12},
              {"gradient_check_relative", 1e-4}}},
            {"timing_fields", {"runtime_ms", "latency_ms", "latency_pct_change"}}}},
          {"summary", report.summary},
          {"timing_summary", report.timing_summary},
          {"notes", report.notes},
          {"record_count", report.records.size()}};
}

std::string sidecar_path(const std::string& csv_path) {
  return std::filesystem::path(csv_path).replace_extension(".json").string();
}

void write_report(const ExperimentReport& report, const std::string& csv_path) {
  const std::filesystem::path path(csv_path);
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  auto write = [](const std::string& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + p + "' for writing");
    out << text;
    if (!out) throw IoError("failed writing '" + p + "'");
  };
  write(csv_path, report_csv(report));
  write(sidecar_path(csv_path), report_json(report).dump(2) + "\n");
}

}  // namespace ltr
