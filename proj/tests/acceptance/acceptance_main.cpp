/* Copyright 2026 The CPDM Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Acceptance suite: one PASS/FAIL line per criterion, each with its runtime
// budget. Exit status is non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "cpdm/bundle.hpp"
#include "cpdm/correlation.hpp"
#include "cpdm/fid.hpp"
#include "cpdm/format.hpp"
#include "cpdm/image_io.hpp"
#include "cpdm/metric.hpp"
#include "cpdm/prng.hpp"
#include "cpdm/refnet.hpp"
#include "cpdm/similarity.hpp"
#include "cpdm/toy_model.hpp"
#include "cpdm/unlearning.hpp"
#include "fixtures.hpp"

namespace {

using namespace cpdm;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> body;
};

std::string num(double v, int digits = 10) { return significant(v, digits); }

// Frozen values from the standalone oracle script.
constexpr double kCmSelf = 0.9995835068721366;
constexpr double kCmFloor = -0.041232819658475695;
constexpr double kLicensedPearson = 0.00293095509558218;

Outcome self_pair_constant() {
  Xorshift64Star rng(101);
  const metric::MetricConfig cfg;
  const refnet::RefExtractor e;
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const FeatureBundle b = testing::random_bundle(rng, 12);
    worst = std::max(worst, std::abs(metric::cpdm_metric(b, b, cfg).cm - 0.99958351));
    const FeatureBundle r = refnet::forward_features(testing::random_image(rng, 16), e);
    worst = std::max(worst, std::abs(metric::cpdm_metric(r, r, cfg).cm - 0.99958351));
  }
  // Clamping off: sweep synthetic pairs whose product spans [0, 1e6].
  metric::MetricConfig raw;
  raw.clamp_cm = false;
  double minimum = 1.0;
  for (int k = 0; k <= 60; ++k) {
    const float scale = static_cast<float>(std::pow(10.0, k / 10.0 - 2.0));
    FeatureBundle a, b;
    a.embedding = Tensor::vector({scale, 0.0f});
    b.embedding = Tensor::vector({0.0f, 0.0f});
    for (std::size_t l = 0; l < 4; ++l) {
      a.stages[l] = Tensor({1, 1, 1}, {scale});
      b.stages[l] = Tensor({1, 1, 1});
    }
    minimum = std::min(minimum, metric::cpdm_metric(a, b, raw).cm);
  }
  const double floor_err = std::abs(minimum - (-0.0412328));
  Outcome o;
  o.pass = worst <= 1e-6 && floor_err <= 1e-6 && std::abs(kCmSelf - 0.99958351) <= 1e-6 &&
           std::abs(kCmFloor - minimum) <= 1e-12;
  o.detail = "max |cm(b,b) - 0.99958351| = " + num(worst, 3) + " over 100 bundles; unclamped minimum " +
             fixed(minimum, 9);
  return o;
}

Outcome gram_equivalence() {
  Xorshift64Star rng(202);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t c = 1 + rng.next() % 8, h = 1 + rng.next() % 6, w = 1 + rng.next() % 6;
    Tensor fm({c, h, w});
    for (float& v : fm.values()) v = static_cast<float>(rng.uniform(-3.0, 3.0));
    const Tensor g = metric::gram(fm);
    for (std::size_t i = 0; i < c; ++i) {
      for (std::size_t j = 0; j < c; ++j) {
        double acc = 0.0;
        for (std::size_t y = 0; y < h; ++y)
          for (std::size_t x = 0; x < w; ++x) acc += static_cast<double>(fm.at(i, y, x)) * fm.at(j, y, x);
        acc /= static_cast<double>(h * w);
        const double rel = std::abs(g.at(i, j) - acc) / std::max(std::abs(acc), 1e-12);
        if (std::abs(acc) > 1e-12) worst = std::max(worst, rel);
      }
    }
  }
  return {worst <= 1e-6, "max relative error " + num(worst, 3) + " over 200 maps"};
}

Outcome fid_cases() {
  using metric::GaussianStats;
  const double shift = metric::fid(GaussianStats{{0}, {1}, 2}, GaussianStats{{1}, {1}, 2});
  const double scale = metric::fid(GaussianStats{{0}, {4}, 2}, GaussianStats{{0}, {1}, 2});
  Xorshift64Star rng(303);
  double self_worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    std::vector<Tensor> xs;
    for (int i = 0; i < 32; ++i) xs.push_back(testing::random_vector(rng, 8));
    const GaussianStats s = metric::gaussian_stats(xs);
    self_worst = std::max(self_worst, metric::fid(s, s));
  }
  const bool ok = std::abs(shift - 1.0) <= 1e-6 && std::abs(scale - 1.0) <= 1e-6 && self_worst <= 1e-8;
  return {ok, "N(0,1)/N(1,1) " + fixed(shift, 9) + ", N(0,4)/N(0,1) " + fixed(scale, 9) +
                  ", max fid(a,a) " + num(self_worst, 3)};
}

Outcome gradient_oracle() {
  constexpr double kStep = 1e-5;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto c = testing::kink_guarded_case(seed, 10.0 * kStep);
    worst = std::max(worst, refnet::grad_check(c.model, c.x, c.target, kStep));
  }
  return {worst <= 1e-4, "max relative error " + num(worst, 3) + " over 20 models"};
}

Outcome ga_ascent() {
  int non_decreasing = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const refnet::ToyModel m = refnet::default_toy_model(seed);
    Xorshift64Star rng(seed * 7919);
    const unlearn::TargetPair t{testing::random_vector(rng, 8), testing::random_vector(rng, 4)};
    const auto step = unlearn::ga_step(m, t, 1e-4);
    if (unlearn::ga_step(step.model, t, 0.0).loss >= step.loss) ++non_decreasing;
  }
  const std::vector<unlearn::TargetPair> targets{testing::standard_target()};
  const unlearn::GAConfig cfg;  // eta 5e-5, 5 epochs
  const auto trace = unlearn::ga_run(testing::standard_toy_model(), targets, cfg);
  const double initial = trace.steps.front().loss;
  const double final_loss = unlearn::ga_step(trace.unlearned, targets[0], 0.0).loss;
  const bool ok = non_decreasing == 20 && final_loss > initial;
  return {ok, std::to_string(non_decreasing) + "/20 single steps non-decreasing; default run loss " +
                  num(initial, 12) + " -> " + num(final_loss, 12)};
}

Outcome wp_exactness() {
  using refnet::Activation;
  // 4x4 identity layer, weights 0.5, Y = [6, -5, 8, 12] for x = [1, 4, 2, 3].
  refnet::ToyModel hand{{refnet::DenseLayer{Tensor({4, 4}, std::vector<float>(16, 0.5f)),
                                            Tensor::vector({1, -10, 3, 7}), Activation::kIdentity}}};
  const std::vector<unlearn::TargetPair> hand_targets{{Tensor::vector({1, 4, 2, 3}), Tensor({4})}};
  const auto tr = unlearn::wp_run(hand, hand_targets, unlearn::PruneSpec{0.5, 0.5});
  std::set<std::pair<std::size_t, std::size_t>> zeros;
  const Tensor& w = tr.unlearned.layers[0].weights;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      if (w.at(i, j) == 0.0f) zeros.emplace(i, j);
  const std::set<std::pair<std::size_t, std::size_t>> expected{{2, 1}, {2, 3}, {3, 1}, {3, 3}};
  const bool hand_ok = zeros == expected;

  const refnet::ToyModel m = testing::standard_toy_model();
  const std::vector<unlearn::TargetPair> targets{testing::standard_target()};
  const unlearn::PruneSpec spec;  // p_c 0.1, p_w 0.03
  const auto trace = unlearn::wp_run(m, targets, spec);
  bool counts_ok = trace.pruned.size() == m.layers.size();
  std::string counts;
  for (std::size_t k = 0; k < m.layers.size() && counts_ok; ++k) {
    std::size_t changed = 0;
    const auto before = m.layers[k].weights.values();
    const auto after = trace.unlearned.layers[k].weights.values();
    for (std::size_t i = 0; i < before.size(); ++i) changed += before[i] != after[i] ? 1 : 0;
    const std::size_t predicted = unlearn::rounded_count(spec.p_c, m.layers[k].rows()) *
                                  unlearn::rounded_count(spec.p_w, m.layers[k].cols());
    counts_ok = counts_ok && changed == predicted && trace.pruned[k].zeroed.size() == predicted;
    counts += (k ? "," : "") + std::to_string(changed) + "/" + std::to_string(predicted);
  }
  return {hand_ok && counts_ok, "hand fixture zeros " + std::to_string(zeros.size()) +
                                    (hand_ok ? " at expected positions" : " at WRONG positions") +
                                    "; default per-layer changed/predicted " + counts};
}

Outcome artist_reproduction() {
  const testing::ArtistFixture f = testing::make_artist_fixture();
  const auto default_cfg = testing::refnet_scale_config(metric::kDefaultLayerWeights);
  const auto uniform_cfg = testing::refnet_scale_config(metric::kUniformLayerWeights);
  const double weighted = analysis::diagonal_accuracy(testing::artist_matrix(f, default_cfg, 4));
  const double uniform = analysis::diagonal_accuracy(testing::artist_matrix(f, uniform_cfg, 4));
  const auto style_default = testing::artist_matrix(f, default_cfg, 4, analysis::Variant::kStyle, true);
  const auto style_uniform = testing::artist_matrix(f, uniform_cfg, 4, analysis::Variant::kStyle, true);
  const double sp = analysis::diagonal_accuracy(style_default);
  const double su = analysis::diagonal_accuracy(style_uniform);
  const double default_clip =
      analysis::diagonal_accuracy(testing::artist_matrix(f, metric::MetricConfig{}, 4));
  const bool ok = weighted >= 0.95 && weighted >= uniform && sp >= su;
  return {ok, "CM accuracy default weights " + fixed(weighted, 2) + " vs uniform " + fixed(uniform, 2) +
                  " (refnet-scale clip); style-loss default " + fixed(sp, 2) + " vs uniform " +
                  fixed(su, 2) + "; default [1,50] clip " + fixed(default_clip, 2) + " (informational)"};
}

Outcome correlation_machinery() {
  const auto table = analysis::load_ratings_csv(fs::path(CPDM_TEST_DATA_DIR) / "hum_data.csv");
  std::vector<double> lng, sht;
  for (const auto& r : table.rows) {
    if (r.category != "licensed-illustration") continue;
    if (r.prompt_length == analysis::PromptLength::kLong) lng.push_back(r.metric_value);
    if (r.prompt_length == analysis::PromptLength::kShort) sht.push_back(r.metric_value);
  }
  const double p = analysis::pearson(lng, sht);
  Xorshift64Star rng(808);
  bool monotone_exact = true;
  for (int t = 0; t < 50; ++t) {
    std::vector<double> x(5 + rng.next() % 40);
    for (double& v : x) v = rng.uniform(-5, 5);
    std::vector<double> up(x.size()), down(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      up[i] = std::exp(x[i]) + x[i] * x[i] * x[i];
      down[i] = -2.0 * x[i] + 1.0;
    }
    monotone_exact = monotone_exact && analysis::spearman(x, up) == 1.0 && analysis::spearman(x, down) == -1.0;
  }
  const double err = std::abs(p - kLicensedPearson);
  return {lng.size() == 10 && err <= 1e-9 && monotone_exact,
          "pearson " + num(p, 15) + " (|err| " + num(err, 3) + "); spearman monotone exact: " +
              (monotone_exact ? "yes" : "no")};
}

Outcome format_determinism() {
  Xorshift64Star rng(909);
  int exact = 0;
  for (int i = 0; i < 500; ++i) {
    const FeatureBundle b = testing::random_bundle(rng, 16);
    std::ostringstream out(std::ios::binary);
    write_bundle(b, out);
    std::istringstream in(out.str(), std::ios::binary);
    if (read_bundle(in) == b) ++exact;
  }

  const fs::path dir = fs::temp_directory_path() / "cpdm_acceptance_matrix";
  fs::remove_all(dir);
  fs::create_directories(dir / "a");
  fs::create_directories(dir / "c");
  const refnet::RefExtractor e;
  for (int i = 0; i < 12; ++i) {
    const Tensor img = testing::random_image(rng, 32);
    char name[32];
    std::snprintf(name, sizeof name, "img%02d.cpdm", i);
    save_bundle(refnet::forward_features(img, e), dir / "a" / name);
    save_bundle(refnet::forward_features(testing::random_image(rng, 32), e), dir / "c" / name);
  }
  auto run_matrix = [&](const std::string& jobs) {
    std::ostringstream out, err;
    const std::string tag = "j" + jobs;
    const int code = cpdm::cli::run({"matrix", "--anchors", (dir / "a").string(), "--candidates",
                                     (dir / "c").string(), "--jobs", jobs, "--out",
                                     (dir / (tag + ".csv")).string(), "--pgm", (dir / (tag + ".pgm")).string(),
                                     "--clip", "1e-15,5e-14"},
                                    out, err);
    return code;
  };
  const bool ran = run_matrix("1") == 0 && run_matrix("8") == 0;
  const bool same_csv = ran && read_file(dir / "j1.csv") == read_file(dir / "j8.csv");
  const bool same_pgm = ran && read_file(dir / "j1.pgm") == read_file(dir / "j8.pgm");
  fs::remove_all(dir);
  return {exact == 500 && same_csv && same_pgm,
          std::to_string(exact) + "/500 round-trips exact; jobs 1 vs 8 CSV " + (same_csv ? "identical" : "DIFFER") +
              ", PGM " + (same_pgm ? "identical" : "DIFFER")};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "self-pair constant and unclamped floor", 1.0, self_pair_constant},
      {2, "gram matches brute-force oracle", 5.0, gram_equivalence},
      {3, "FID analytic cases", 1.0, fid_cases},
      {4, "gradient oracle on kink-guarded models", 10.0, gradient_oracle},
      {5, "gradient ascent raises target loss", 10.0, ga_ascent},
      {6, "weight pruning exactness", 1.0, wp_exactness},
      {7, "synthetic 10-artist matrix", 60.0, artist_reproduction},
      {8, "correlation machinery", 1.0, correlation_machinery},
      {9, "format round-trip and matrix determinism", 30.0, format_determinism},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_budget = secs < c.budget_s;
    const bool pass = o.pass && in_budget;
    failures += pass ? 0 : 1;
    std::printf("%s criterion %d: %s | %s | %.3f s (budget %.0f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs, c.budget_s, in_budget ? "" : ", EXCEEDED");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
