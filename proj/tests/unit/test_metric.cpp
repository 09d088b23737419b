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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "cpdm/error.hpp"
#include "cpdm/metric.hpp"
#include "cpdm/prng.hpp"
#include "cpdm/refnet.hpp"
#include "fixtures.hpp"
#include "json.hpp"

namespace cpdm::metric {
namespace {

constexpr double kCmMax = 0.99958350687213661;  // 1 - (1/49)^2

FeatureBundle scalar_stage_bundle(std::array<float, 4> stage_values, std::vector<float> emb) {
  FeatureBundle b;
  b.embedding = Tensor::vector(std::move(emb));
  for (std::size_t l = 0; l < 4; ++l) b.stages[l] = Tensor({1, 1, 1}, {stage_values[l]});
  return b;
}

std::vector<FeatureBundle> refnet_bundles(std::size_t n, std::uint64_t seed) {
  Xorshift64Star rng(seed);
  const refnet::RefExtractor e;
  std::vector<FeatureBundle> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(refnet::forward_features(testing::random_image(rng, 32), e));
  return out;
}

TEST(Semantic, Examples) {
  const Tensor a = Tensor::vector({0.5f, -1.0f});
  EXPECT_EQ(semantic_metric(a, a), 0.0);
  EXPECT_DOUBLE_EQ(semantic_metric(Tensor::vector({1, 2}), Tensor::vector({3, 4})), 4.0);
  EXPECT_DOUBLE_EQ(semantic_metric(Tensor::vector({0, 0, 0}), Tensor::vector({1, 1, 1})), 1.0);
}

TEST(Semantic, LengthMismatch) {
  EXPECT_THROW(semantic_metric(Tensor({3}), Tensor({4})), ShapeError);
}

TEST(Gram, Examples) {
  EXPECT_EQ(gram(Tensor({3, 2, 2})), Tensor({3, 3}));
  EXPECT_EQ(gram(Tensor({1, 2, 2}, {1, 1, 1, 1})), Tensor({1, 1}, {1.0f}));
  EXPECT_EQ(gram(Tensor({2, 2, 2}, {1, 0, 0, 0, 0, 1, 0, 0})),
            Tensor({2, 2}, {0.25f, 0, 0, 0.25f}));
}

TEST(Gram, MatchesTripleLoopAndIsSymmetricPsd) {
  Xorshift64Star rng(12);
  for (int t = 0; t < 50; ++t) {
    const std::size_t c = 1 + rng.next() % 8, h = 1 + rng.next() % 6, w = 1 + rng.next() % 6;
    Tensor fm({c, h, w});
    for (float& v : fm.values()) v = static_cast<float>(rng.uniform(-2, 2));
    const Tensor g = gram(fm);
    for (std::size_t i = 0; i < c; ++i) {
      for (std::size_t j = 0; j < c; ++j) {
        double acc = 0.0;
        for (std::size_t y = 0; y < h; ++y)
          for (std::size_t x = 0; x < w; ++x) acc += double(fm.at(i, y, x)) * fm.at(j, y, x);
        acc /= double(h * w);
        EXPECT_NEAR(g.at(i, j), acc, 1e-6 * std::max(1.0, std::abs(acc)));
        EXPECT_EQ(g.at(i, j), g.at(j, i));
      }
    }
    for (int probe = 0; probe < 20; ++probe) {
      std::vector<double> v(c);
      for (double& x : v) x = rng.uniform(-1, 1);
      double q = 0.0;
      for (std::size_t i = 0; i < c; ++i)
        for (std::size_t j = 0; j < c; ++j) q += v[i] * g.at(i, j) * v[j];
      EXPECT_GE(q, -1e-9);
    }
  }
}

TEST(Gram, RejectsWrongRank) { EXPECT_THROW(gram(Tensor({2, 2})), ShapeError); }

TEST(LayerDistance, Examples) {
  const Tensor g({2, 2}, {1, 2, 2, 5});
  EXPECT_EQ(layer_distance(g, g), 0.0);
  EXPECT_DOUBLE_EQ(layer_distance(Tensor({1, 1}, {1}), Tensor({1, 1}, {3})), 4.0);
  EXPECT_DOUBLE_EQ(layer_distance(Tensor({2, 2}, {1, 1, 1, 1}), Tensor({2, 2})), 1.0);
  EXPECT_THROW(layer_distance(Tensor({2, 2}), Tensor({3, 3})), ShapeError);
}

TEST(Style, IdenticalBundles) {
  const FeatureBundle b = refnet_bundles(1, 3)[0];
  const StyleResult r = style_metric(b, b, MetricConfig{});
  for (double d : r.layer_distances) EXPECT_EQ(d, 0.0);
  EXPECT_EQ(r.m_style, 0.0);
}

TEST(Style, DefaultWeightsOnUnitDistances) {
  const FeatureBundle a = scalar_stage_bundle({1, 1, 1, 1}, {0});
  const FeatureBundle b = scalar_stage_bundle({0, 0, 0, 0}, {0});
  const StyleResult r = style_metric(a, b, MetricConfig{});
  for (double d : r.layer_distances) EXPECT_DOUBLE_EQ(d, 1.0);
  EXPECT_NEAR(r.m_style, 60004.6, 1e-9);
}

TEST(Style, UniformWeightsOnGradedDistances) {
  // Gram of a 1x1x1 map with value v is v^2, so D = v^4 against a zero map.
  const FeatureBundle a = scalar_stage_bundle(
      {1.0f, static_cast<float>(std::pow(2.0, 0.25)), static_cast<float>(std::pow(3.0, 0.25)),
       static_cast<float>(std::pow(4.0, 0.25))},
      {0});
  const FeatureBundle b = scalar_stage_bundle({0, 0, 0, 0}, {0});
  MetricConfig cfg;
  cfg.layer_weights = kUniformLayerWeights;
  const StyleResult r = style_metric(a, b, cfg);
  for (std::size_t l = 0; l < 4; ++l) EXPECT_NEAR(r.layer_distances[l], double(l + 1), 1e-5);
  EXPECT_NEAR(r.m_style, 10.0, 1e-5);
}

TEST(Cm, SelfPairConstant) {
  for (const FeatureBundle& b : refnet_bundles(5, 21)) {
    const MetricReport r = cpdm_metric(b, b, MetricConfig{});
    EXPECT_NEAR(r.cm, kCmMax, 1e-12);
    EXPECT_NEAR(r.cm_percent, 99.958351, 1e-6);
  }
}

TEST(Cm, NormalizationExamples) {
  MetricConfig cfg;
  EXPECT_NEAR(similarity_from_product(0.0, cfg), kCmMax, 1e-15);
  EXPECT_NEAR(similarity_from_product(25.0, cfg), 0.7396917950853811, 1e-12);
  EXPECT_EQ(similarity_from_product(50.0, cfg), 0.0);
  EXPECT_EQ(similarity_from_product(1e9, cfg), 0.0);
  cfg.clamp_cm = false;
  EXPECT_NEAR(similarity_from_product(50.0, cfg), -0.041232819658475695, 1e-12);
  EXPECT_NEAR(similarity_from_product(1e9, cfg), -0.041232819658475695, 1e-12);
  EXPECT_NEAR(normalize(25.0, cfg), 25.0 / 49.0, 1e-15);
}

TEST(Cm, ProductOverFiftyViaBundles) {
  // m_sem = 1, style D = [1,1,1,1] with uniform weights -> m_style = 4; scale to exceed 50
  const FeatureBundle a = scalar_stage_bundle({2, 2, 2, 2}, {10});
  const FeatureBundle b = scalar_stage_bundle({0, 0, 0, 0}, {0});
  MetricConfig cfg;
  cfg.layer_weights = kUniformLayerWeights;
  const MetricReport r = cpdm_metric(a, b, cfg);
  EXPECT_DOUBLE_EQ(r.m_sem, 100.0);
  EXPECT_DOUBLE_EQ(r.m_style, 64.0);
  EXPECT_DOUBLE_EQ(r.product, 6400.0);
  EXPECT_EQ(r.cm, 0.0);
}

TEST(Cm, MonotoneInProduct) {
  const MetricConfig cfg;
  double prev = similarity_from_product(0.0, cfg);
  for (double x = 0.0; x <= 60.0; x += 0.25) {
    const double v = similarity_from_product(x, cfg);
    EXPECT_LE(v, prev);
    if (x <= cfg.clip_lo) EXPECT_EQ(v, similarity_from_product(0.0, cfg));
    if (x >= cfg.clip_hi) EXPECT_EQ(v, 0.0);
    prev = v;
  }
}

TEST(Cm, SymmetricAndBoundedBySelf) {
  const auto bs = refnet_bundles(6, 44);
  const MetricConfig cfg = testing::refnet_scale_config(kDefaultLayerWeights);
  for (const auto& a : bs) {
    for (const auto& b : bs) {
      const double ab = cpdm_metric(a, b, cfg).cm;
      EXPECT_EQ(ab, cpdm_metric(b, a, cfg).cm);
      EXPECT_LE(ab, cpdm_metric(a, a, cfg).cm);
      EXPECT_GE(ab, 0.0);
    }
  }
}

TEST(Cm, IncompatiblePairIsShapeError) {
  const FeatureBundle a = scalar_stage_bundle({1, 1, 1, 1}, {0, 1});
  const FeatureBundle b = scalar_stage_bundle({1, 1, 1, 1}, {0});
  EXPECT_THROW(cpdm_metric(a, b, MetricConfig{}), ShapeError);
}

TEST(Config, Validation) {
  MetricConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.clip_hi = cfg.clip_lo;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = MetricConfig{};
  cfg.layer_weights[2] = -1.0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = MetricConfig{};
  cfg.layer_weights[0] = std::nan("");
  EXPECT_THROW(cfg.validate(), ValidationError);
}

TEST(Cm, JsonIsStrictAndPlainHasPercent) {
  const FeatureBundle b = refnet_bundles(1, 9)[0];
  const MetricReport r = cpdm_metric(b, b, MetricConfig{});
  const auto j = nlohmann::json::parse(to_json(r));
  EXPECT_EQ(j.at("layer_distances").size(), 4u);
  EXPECT_NEAR(j.at("cm_percent").get<double>(), 99.958351, 1e-9);
  EXPECT_NE(to_plain(r).find("cm_percent 99.958351"), std::string::npos);
}

TEST(DeltaClip, Examples) {
  const Tensor text = Tensor::vector({1, 0});
  const Tensor gen = Tensor::vector({0.3f, 0.2f});
  EXPECT_EQ(delta_clip(gen, gen, text), 0.0);
  EXPECT_NEAR(delta_clip(Tensor::vector({1, 0}), Tensor::vector({0, 1}), text), -100.0, 1e-12);
  const Tensor g2 = Tensor::vector({0.30f, static_cast<float>(std::sqrt(1 - 0.09))});
  const Tensor u2 = Tensor::vector({0.25f, static_cast<float>(std::sqrt(1 - 0.0625))});
  EXPECT_NEAR(delta_clip(g2, u2, text), -5.0, 1e-5);
}

TEST(DeltaClip, Errors) {
  EXPECT_THROW(delta_clip(Tensor({2}), Tensor::vector({1, 0}), Tensor::vector({1, 0})), ValidationError);
  EXPECT_THROW(delta_clip(Tensor::vector({1}), Tensor::vector({1, 0}), Tensor::vector({1, 0})), ShapeError);
}

}  // namespace
}  // namespace cpdm::metric
