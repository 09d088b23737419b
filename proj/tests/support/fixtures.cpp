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

#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace cpdm::testing {

metric::MetricConfig refnet_scale_config(const std::array<double, 4>& weights) {
  metric::MetricConfig cfg;
  cfg.layer_weights = weights;
  cfg.clip_lo = kRefnetClipLo;
  cfg.clip_hi = kRefnetClipHi;
  return cfg;
}

Tensor random_image(Xorshift64Star& rng, std::size_t size, double lo, double hi) {
  Tensor img({3, size, size});
  for (float& v : img.values()) v = static_cast<float>(rng.uniform(lo, hi));
  return img;
}

namespace {

Tensor jitter(const Tensor& img, Xorshift64Star& rng, double sigma) {
  Tensor out = img;
  for (float& v : out.values()) {
    v = static_cast<float>(std::clamp(static_cast<double>(v) + sigma * rng.normal(), 0.0, 1.0));
  }
  return out;
}

}  // namespace

ArtistFixture make_artist_fixture(std::size_t artists, std::size_t per_artist, double sigma,
                                  std::size_t image_size, std::uint64_t seed) {
  Xorshift64Star rng(seed);
  const refnet::RefExtractor extractor;
  ArtistFixture f;
  for (std::size_t a = 0; a < artists; ++a) {
    const Tensor base = random_image(rng, image_size, 0.1, 0.9);
    const std::string artist = "artist" + std::to_string(a);
    for (std::size_t k = 0; k < per_artist; ++k) {
      const Tensor anchor = jitter(base, rng, sigma);
      const Tensor candidate = jitter(anchor, rng, sigma);
      const std::string id = artist + "_" + std::to_string(k);
      f.anchors.push_back(refnet::forward_features(anchor, extractor, id));
      f.candidates.push_back(refnet::forward_features(candidate, extractor, id + "_gen"));
      f.groups.push_back(artist);
    }
  }
  return f;
}

analysis::SimilarityMatrix artist_matrix(const ArtistFixture& f, const metric::MetricConfig& cfg,
                                         unsigned jobs, analysis::Variant variant,
                                         bool loss_valued) {
  auto m = analysis::build_matrix(f.anchors, f.candidates, cfg, variant, jobs, loss_valued);
  m.anchor_groups = f.groups;
  m.candidate_groups = f.groups;
  return m;
}

FeatureBundle random_bundle(Xorshift64Star& rng, std::size_t max_axis) {
  auto axis = [&] { return 1 + static_cast<std::size_t>(rng.next() % max_axis); };
  auto fill = [&](std::vector<std::size_t> shape) {
    Tensor t(std::move(shape));
    for (float& v : t.values()) v = static_cast<float>(rng.uniform(-10.0, 10.0));
    return t;
  };
  FeatureBundle b;
  b.image_id = "img" + std::to_string(rng.next() % 100000);
  b.extractor_tag = (rng.next() % 2) ? "refnet" : "external,tag";
  b.embedding = fill({axis()});
  for (auto& s : b.stages) s = fill({axis(), axis(), axis()});
  if (rng.next() % 2) b.text_embedding = fill({axis()});
  if (rng.next() % 3 == 0) b.extra.push_back(Entry{"future_entry", fill({axis(), axis()})});
  return b;
}

Tensor random_vector(Xorshift64Star& rng, std::size_t n, double lo, double hi) {
  std::vector<float> v(n);
  for (float& x : v) x = static_cast<float>(rng.uniform(lo, hi));
  return Tensor::vector(std::move(v));
}

refnet::ToyModel standard_toy_model() { return refnet::default_toy_model(kStandardToySeed); }

unlearn::TargetPair standard_target() {
  Xorshift64Star rng(kStandardToySeed + 1);
  unlearn::TargetPair t{random_vector(rng, 8), random_vector(rng, 4)};
  return t;
}

GuardedCase kink_guarded_case(std::uint64_t seed, double margin) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    const std::uint64_t s = seed * 1000003ULL + attempt + 1;
    refnet::ToyModel m = refnet::default_toy_model(s);
    Xorshift64Star rng(s ^ 0x9E3779B97F4A7C15ULL);
    for (auto& layer : m.layers) {
      for (float& b : layer.bias.values()) b = static_cast<float>(rng.uniform(-0.1, 0.1));
    }
    Tensor x = random_vector(rng, m.input_size(), -2.0, 2.0);
    Tensor y = random_vector(rng, m.output_size());
    const auto rec = refnet::toy_forward(m, x);
    if (refnet::relu_margin(m, rec) > margin) return GuardedCase{std::move(m), std::move(x), std::move(y)};
  }
}

}  // namespace cpdm::testing
