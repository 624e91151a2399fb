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

// Acceptance suite. Prints one PASS or FAIL line per criterion and exits
// non-zero if any criterion fails. Tolerances are fixed here; the directional
// experiments run at their default specs, which takes a while.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "ltr/aggregation.h"
#include "ltr/experiments.h"
#include "ltr/marketplace.h"
#include "ltr/metrics.h"
#include "ltr/pipeline.h"
#include "ltr/rankers.h"
#include "testing.h"

namespace ltr {
namespace {

using nlohmann::json;
using testing::random_listings;
using testing::random_query;
using testing::random_variant;

constexpr double kCollinearityTol = 1e-12;
constexpr double kPermutationTol = 1e-9;
constexpr double kGbtOracleTol = 1e-12;
constexpr double kGradientTol = 1e-4;
constexpr double kGradientSeconds = 60.0;
constexpr double kMnlTol = 0.02;
constexpr double kIiaSigmas = 3.0;
constexpr double kExperimentSeconds = 600.0;
constexpr std::size_t kHierarchySeeds = 5;

int failures = 0;

void report(const std::string& id, const std::string& name, bool pass,
            const std::string& detail) {
  std::printf("%s %s %s: %s\n", pass ? "PASS" : "FAIL", id.c_str(), name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---------------------------------------------------------------------------
// Structural invariants

void anti_commutativity() {
  std::mt19937_64 rng(101);
  int exact = 0;
  for (int t = 0; t < 1000; ++t) {
    const RankerVariant v =
        random_variant(VariantKind::kTruePairwiseGbt, static_cast<std::uint64_t>(t % 20));
    const auto& r = std::get<TruePairwiseRanker>(v.model);
    const auto c = random_listings(rng, 2, kMinFeatureWidth);
    const Query q = random_query(rng);
    exact += true_pairwise_logit(r, c[0], c[1], q) == -true_pairwise_logit(r, c[1], c[0], q);
  }
  report("1.1", "anti-commutativity", exact == 1000, fmt("%d/1000 pairs bitwise", exact));
}

void collinearity() {
  std::mt19937_64 rng(102);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    PairwiseRanker f;
    random_variant(VariantKind::kPairwise, static_cast<std::uint64_t>(t % 20), &f);
    const auto c = random_listings(rng, 3, kMinFeatureWidth);
    const Query q = random_query(rng);
    worst = std::max(worst, std::abs(pairwise_logit(f, c[0], c[1], q) +
                                     pairwise_logit(f, c[1], c[2], q) -
                                     pairwise_logit(f, c[0], c[2], q)));
  }
  report("1.2", "pairwise collinearity", worst < kCollinearityTol,
         fmt("max residual %.3g over 1000 triples (tol %.0e)", worst, kCollinearityTol));
}

void permutation_invariance() {
  double worst = 0.0;
  for (VariantKind kind : {VariantKind::kAllPairwiseApfn, VariantKind::kAllPairwiseAttn}) {
    std::mt19937_64 rng(103);
    const RankerVariant v = random_variant(kind, 103);
    const auto c = random_listings(rng, 10, kMinFeatureWidth);
    const Query q = random_query(rng);
    const std::vector<double> zero(c.size(), 0.0);
    const auto base_logits = pointwise_logits(
        kind == VariantKind::kAllPairwiseApfn ? std::get<AllPairwiseRanker>(v.model).base_f
                                              : std::get<AttentionRanker>(v.model).base_f,
        c, q);
    const std::vector<double> reference = second_stage_scores(v, q, c, base_logits);
    std::vector<std::size_t> perm(c.size());
    std::iota(perm.begin(), perm.end(), 0);
    for (int s = 0; s < 200; ++s) {
      std::shuffle(perm.begin(), perm.end(), rng);
      std::vector<Listing> shuffled;
      std::vector<double> logits;
      for (std::size_t p : perm) {
        shuffled.push_back(c[p]);
        logits.push_back(base_logits[p]);
      }
      const std::vector<double> scores = second_stage_scores(v, q, shuffled, logits);
      for (std::size_t k = 0; k < perm.size(); ++k) {
        const double a = reference[perm[k]];
        const double rel = std::abs(scores[k] - a) / std::max(std::abs(a), 1e-12);
        worst = std::max(worst, rel);
      }
    }
  }
  report("1.3", "permutation invariance (apfn, attn)", worst < kPermutationTol,
         fmt("max relative change %.3g over 200 shuffles each (tol %.0e)", worst,
             kPermutationTol));
}

void residual_identity() {
  int equal = 0;
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    const auto seed = static_cast<std::uint64_t>(t);
    std::mt19937_64 rng(seed + 104);
    PipelineConfig c;
    random_variant(VariantKind::kPairwise, seed, &c.first_stage);
    if (t % 2 == 0) {
      c.second_stage = RankerVariant{VariantKind::kAllPairwiseApfn,
                                     AllPairwiseRanker::create(c.first_stage, seed)};
    } else {
      c.second_stage = RankerVariant{VariantKind::kAllPairwiseAttn,
                                     AttentionRanker::create(c.first_stage, seed)};
    }
    c.rerank_top_k = 60;
    const auto cands = random_listings(rng, 30, kMinFeatureWidth);
    const Query q = random_query(rng);
    equal += rank(c, q, cands).ordering == first_stage_rank(c.first_stage, q, cands).order;
  }
  report("1.4", "residual identity", equal == trials,
         fmt("%d/%d zero-APLN rankings equal the first stage", equal, trials));
}

void gbt_oracle() {
  using Big = boost::multiprecision::cpp_bin_float_100;
  std::mt19937_64 rng(105);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  double worst = 0.0;
  const std::size_t n = 5;
  for (int t = 0; t < 200; ++t) {
    std::vector<double> m(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        m[i * n + j] = u(rng);
        m[j * n + i] = -m[i * n + j];
      }
    }
    const auto rows = rows_from_matrix(m, n);
    for (std::size_t i = 0; i < n; ++i) {
      Big sum = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) sum += boost::multiprecision::exp(-Big(m[i * n + j]));
      }
      const double oracle = static_cast<double>(Big(1) / (Big(1) + sum));
      worst = std::max(worst, std::abs(gbt_score(rows[i]) - oracle));
    }
  }
  report("1.5", "generalized Bradley-Terry oracle", worst < kGbtOracleTol,
         fmt("max |score - oracle| %.3g over 200 5x5 matrices (tol %.0e)", worst,
             kGbtOracleTol));
}

void total_order() {
  std::size_t checked = 0;
  std::size_t violations = 0;
  for (VariantKind kind : kAllVariants) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      for (std::size_t n = 1; n <= 6; ++n) {
        std::mt19937_64 rng(seed * 1000 + n);
        PipelineConfig c;
        const RankerVariant v = random_variant(kind, seed, &c.first_stage);
        if (kind != VariantKind::kPairwise) c.second_stage = v;
        c.rerank_top_k = 1 + seed % 6;
        const auto cands = random_listings(rng, static_cast<int>(n), kMinFeatureWidth);
        const RankResult r = rank(c, random_query(rng), cands);
        std::vector<std::size_t> sorted = r.ordering;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < n; ++i) violations += sorted.size() != n || sorted[i] != i;
        for (std::size_t p = 0; p + 1 < n; ++p) {
          violations += !ranks_before(r, r.ordering[p], r.ordering[p + 1]);
        }
        for (std::size_t a = 0; a < n; ++a) {
          for (std::size_t b = 0; b < n; ++b) {
            if (a != b) violations += ranks_before(r, a, b) == ranks_before(r, b, a);
            for (std::size_t d = 0; d < n; ++d) {
              ++checked;
              violations += ranks_before(r, a, b) && ranks_before(r, b, d) &&
                            !ranks_before(r, a, d);
            }
          }
        }
      }
    }
  }
  report("1.6", "total order", violations == 0,
         fmt("%zu violations, %zu triples checked over 5 variants x N<=6", violations,
             checked));
}

// ---------------------------------------------------------------------------
// Numerical correctness

void gradient_checks() {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::size_t params = 0;
  for (VariantKind kind : kAllVariants) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const testing::VariantCheck c = testing::check_variant(kind, seed);
      worst = std::max(worst, c.max_relative_error);
      params += c.parameters;
    }
  }
  const double secs = seconds_since(start);
  report("2.1", "end-to-end gradient checks", worst < kGradientTol && secs < kGradientSeconds,
         fmt("max relative error %.3g over %zu parameters, 5 variants x 20 seeds, %.1f s "
             "(tol %.0e, < %.0f s)",
             worst, params, secs, kGradientTol, kGradientSeconds));
}

// ---------------------------------------------------------------------------
// Simulator fidelity

void multinomial_logit() {
  ChoiceModelConfig config;
  config.similarity_penalty = 0.0;
  config.temperature = 0.7;
  std::mt19937_64 rng(106);
  const auto c = random_listings(rng, 6, kDefaultFeatureWidth);
  Query q;
  q.features = {0.3, 0.8};
  std::vector<double> u;
  for (const Listing& l : c) u.push_back(base_utility(q, l, config) / config.temperature);
  const std::vector<double> expected = softmax(u);
  std::vector<int> counts(c.size(), 0);
  const int draws = 50000;
  for (int k = 0; k < draws; ++k) {
    ++counts[ground_truth_choice(q, c, config, mix_seed(106, static_cast<std::uint64_t>(k)))];
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    worst = std::max(worst, std::abs(counts[i] / static_cast<double>(draws) - expected[i]));
  }
  report("3.1", "lambda=0 chooser is multinomial logit", worst < kMnlTol,
         fmt("max |frequency - softmax| %.4f over 50000 draws (tol %.2f)", worst, kMnlTol));
}

void iia_violation() {
  const ChoiceModelConfig config;
  const testing::TwinShares s = testing::twin_shares(config, 10000, 107);
  const bool share = s.y_share_of_yz_with_x + kIiaSigmas * s.share_se < s.y_share_without_x;
  const bool p_y = s.p_y_with_x + kIiaSigmas * s.p_y_se < s.p_y_without_x;
  report("3.2", "IIA violation with lambda>0", share && p_y,
         fmt("P(y) %.4f with x vs %.4f without (se %.4f); y share of {y,z} %.4f vs %.4f "
             "(se %.4f); lambda %.1f, 10000 draws, %.0f sigma",
             s.p_y_with_x, s.p_y_without_x, s.p_y_se, s.y_share_of_yz_with_x,
             s.y_share_without_x, s.share_se, config.similarity_penalty, kIiaSigmas));
}

// ---------------------------------------------------------------------------
// Directional reproductions

std::string report_dir() {
  const char* env = std::getenv("LTR_ACCEPTANCE_DIR");
  return env ? env : "acceptance_reports";
}

ExperimentReport timed_run(ExperimentKind kind) {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentSpec spec = default_spec(kind);
  ExperimentReport r = run_experiment(spec);
  const double secs = seconds_since(start);
  write_report(r, report_dir() + "/" + to_string(kind) + ".csv");
  report("4.0", to_string(kind) + " runtime", secs < kExperimentSeconds,
         fmt("%.1f s with %zu seeds (limit %.0f s)", secs, spec.model_seeds.size(),
             kExperimentSeconds));
  return r;
}

// Mean of `metric` for `variant` at parameter value p, over seeds in `seeds`
// (all seeds when empty).
double mean_of(const ExperimentReport& r, const std::string& metric, const std::string& variant,
               double p, std::size_t max_seeds = 0) {
  std::vector<double> v;
  for (const ExperimentRecord* x : r.select(metric, variant)) {
    if (!std::isnan(p) && x->parameter_value != p) continue;
    if (max_seeds > 0) {
      const auto& seeds = r.spec.model_seeds;
      const auto it = std::find(seeds.begin(), seeds.end(), x->seed);
      if (it - seeds.begin() >= static_cast<long>(max_seeds)) continue;
    }
    v.push_back(x->value);
  }
  return mean(v);
}

double stddev_of(const ExperimentReport& r, const std::string& variant) {
  std::vector<double> v;
  for (const ExperimentRecord* x : r.select("ndcg", variant)) v.push_back(x->value);
  return stddev(v);
}

void uncertainty_and_hierarchy() {
  const ExperimentReport r = timed_run(ExperimentKind::kUncertainty);
  const double any = std::nan("");
  const double apfn = mean_of(r, "ndcg", "all_pairwise_apfn", any, kHierarchySeeds);
  const double gbt = mean_of(r, "ndcg", "true_pairwise_gbt", any, kHierarchySeeds);
  const double pw = mean_of(r, "ndcg", "pairwise", any, kHierarchySeeds);
  report("4.1", "accuracy hierarchy apfn > tp-gbt > pairwise", apfn > gbt && gbt > pw,
         fmt("mean NDCG over seeds 1-%zu: apfn %.4f, tp-gbt %.4f, pairwise %.4f", kHierarchySeeds,
             apfn, gbt, pw));

  const double sd_pw = stddev_of(r, "pairwise");
  const double sd_apfn = stddev_of(r, "all_pairwise_apfn");
  const double sd_attn = stddev_of(r, "all_pairwise_attn");
  report("4.4", "uncertainty: pairwise stddev <= multivariate stddev",
         sd_pw <= sd_apfn && sd_pw <= sd_attn,
         fmt("stddev over %zu seeds: pairwise %.4f, apfn %.4f, attn %.4f (tp-avg %.4f, tp-gbt "
             "%.4f reported only)",
             r.spec.model_seeds.size(), sd_pw, sd_apfn, sd_attn,
             stddev_of(r, "true_pairwise_avg"), stddev_of(r, "true_pairwise_gbt")));
}

void rerank_tradeoff() {
  const ExperimentReport r = timed_run(ExperimentKind::kRerankTradeoff);
  const std::string v = to_string(r.spec.second_stage_variant);
  std::map<int, double> gain;
  std::map<int, double> latency;
  for (int k : r.spec.rerank_ks) {
    gain[k] = mean_of(r, "ndcg_pct_change", v, k);
    latency[k] = mean_of(r, "latency_ms", v, k);
  }
  const double late = gain[60] - gain[40];
  const double early = gain[20] - gain[1];
  std::string gains;
  std::string lat;
  bool increasing = true;
  double prev = -1.0;
  for (const auto& [k, g] : gain) {
    gains += fmt(" k=%d:%+.3f%%", k, g);
    lat += fmt(" k=%d:%.4fms", k, latency[k]);
    increasing = increasing && latency[k] > prev;
    prev = latency[k];
  }
  report("4.2a", "rerank NDCG gain flattens", late < early,
         fmt("gain(60)-gain(40) %.3f vs gain(20)-gain(1) %.3f;%s", late, early, gains.c_str()));
  report("4.2b", "rerank latency strictly increasing in k", increasing,
         fmt("mean rank() latency%s", lat.c_str()));
}

void diversity() {
  const ExperimentReport r = timed_run(ExperimentKind::kDiversity);
  const std::string v = to_string(r.spec.second_stage_variant);
  const double d1 = mean_of(r, "price_variance_diversity", v, 1);
  const double d60 = mean_of(r, "price_variance_diversity", v, 60);
  report("4.3", "diversity(k=60) > diversity(k=1)", d60 > d1,
         fmt("%s normalized price variance %.5f at k=60 vs %.5f at k=1", v.c_str(), d60, d1));
}

void stability() {
  const ExperimentReport r = timed_run(ExperimentKind::kStability);
  const std::string v = to_string(r.spec.second_stage_variant);
  const double any = std::nan("");
  const double res = mean_of(r, "mean_flips", v + "_residual", any);
  const double non = mean_of(r, "mean_flips", v + "_nonresidual", any);
  const double pw = mean_of(r, "mean_flips", "pairwise", any);
  report("4.5", "residual flips < non-residual flips", res < non,
         fmt("mean top-%d flips: residual %.4f, non-residual %.4f (reduction %.1f%%), "
             "pairwise %.4f",
             r.spec.page_size, res, non, non > 0 ? 100.0 * (non - res) / non : 0.0, pw));
}

void multi_objective() {
  const ExperimentReport r = timed_run(ExperimentKind::kMultiObjective);
  const std::string v = to_string(r.spec.second_stage_variant);
  const double off = mean_of(r, "top3_trip_rating", v, 0);
  const double on = mean_of(r, "top3_trip_rating", v, 1);
  report("4.6", "trip-rating weighting raises top-3 rating", on > off,
         fmt("mean expected top-3 rating %.4f weighted vs %.4f unweighted; NDCG %.4f vs %.4f",
             on, off, mean_of(r, "ndcg", v, 1), mean_of(r, "ndcg", v, 0)));
}

// ---------------------------------------------------------------------------
// Reproducibility of the CLI

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// CSV rows minus wall-clock content: runtime_ms is blanked and timing rows
// are dropped.
std::string value_rows(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::string out;
  while (std::getline(in, line)) {
    std::vector<std::string> cols;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cols.push_back(c);
    if (cols.size() != 9 || cols[8] == "1") continue;
    cols[7].clear();
    for (const std::string& c : cols) out += c + ",";
    out += "\n";
  }
  return out;
}

void reproducibility() {
  const std::string dir = report_dir() + "/repro";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const std::string ltr = LTR_CLI_PATH;
  const std::string log = dir + "/log.jsonl";
  const std::string model = dir + "/apfn.json";
  const std::string spec_path = dir + "/spec.json";
  const std::string csv = dir + "/report.csv";
  std::ofstream(spec_path) << json{{"experiment", "uncertainty"},
                                   {"model_seeds", {1, 2}},
                                   {"data",
                                    {{"pool_size", 400},
                                     {"train_impressions", 100},
                                     {"test_impressions", 50}}},
                                   {"first_stage", {{"epochs", 2}}},
                                   {"second_stage", {{"epochs", 2}}}}
                                  .dump();
  const std::vector<std::pair<std::string, std::vector<std::string>>> commands = {
      {"generate --impressions 300 --seed 5 --out " + log, {log}},
      {"train --variant all_pairwise_apfn --epochs 2 --seed 3 --log " + log + " --out " + model,
       {model, model + ".trace.csv"}},
      {"evaluate --model " + model + " --log " + log, {}},
      {"inspect --model " + model, {}},
      {"experiment --spec " + spec_path + " --out " + csv, {}},
  };
  int identical = 0;
  std::string detail;
  for (const auto& [args, files] : commands) {
    std::vector<std::string> outputs[2];
    bool ok = true;
    for (auto& run : outputs) {
      const std::string stdout_path = dir + "/stdout.txt";
      const std::string cmd = ltr + " " + args + " > " + stdout_path + " 2>&1";
      ok = ok && std::system(cmd.c_str()) == 0;
      run.push_back(slurp(stdout_path));
      for (const std::string& f : files) run.push_back(slurp(f));
      if (args.rfind("experiment", 0) == 0) {
        run.back() = "";
        run.push_back(value_rows(slurp(csv)));
        run.push_back(json::parse(slurp(sidecar_path(csv))).at("summary").dump());
      }
    }
    const bool same = ok && outputs[0] == outputs[1];
    identical += same;
    const std::string name = args.substr(0, args.find(' '));
    detail += " " + name + (same ? ":identical" : ":DIFFERENT");
  }
  report("5.1", "CLI reruns reproduce outputs", identical == static_cast<int>(commands.size()),
         fmt("%d/%zu commands;", identical, commands.size()) + detail);
}

}  // namespace
}  // namespace ltr

int main() {
  using namespace ltr;
  std::filesystem::create_directories(report_dir());
  anti_commutativity();
  collinearity();
  permutation_invariance();
  residual_identity();
  gbt_oracle();
  total_order();
  gradient_checks();
  multinomial_logit();
  iia_violation();
  reproducibility();
  rerank_tradeoff();
  diversity();
  stability();
  multi_objective();
  uncertainty_and_hierarchy();
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
