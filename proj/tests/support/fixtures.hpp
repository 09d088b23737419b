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

#ifndef CPDM_TESTS_SUPPORT_FIXTURES_HPP_
#define CPDM_TESTS_SUPPORT_FIXTURES_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cpdm/bundle.hpp"
#include "cpdm/metric.hpp"
#include "cpdm/prng.hpp"
#include "cpdm/refnet.hpp"
#include "cpdm/similarity.hpp"
#include "cpdm/toy_model.hpp"
#include "cpdm/unlearning.hpp"

namespace cpdm::testing {

inline constexpr std::uint64_t kArtistFixtureSeed = 20240601;
inline constexpr std::uint64_t kStandardToySeed = 42;

// Refnet activations are far smaller than those of a pretrained encoder:
// M_sem * M_style for refnet pairs lies between ~1e-18 and ~1e-8, so the
// default [1, 50] clip maps every pair to the same value. The fixture keeps
// the default 1:50 clip ratio and moves it into refnet units.
inline constexpr double kRefnetUnit = 1e-15;
inline constexpr double kRefnetClipLo = 1.0 * kRefnetUnit;
inline constexpr double kRefnetClipHi = 50.0 * kRefnetUnit;

metric::MetricConfig refnet_scale_config(const std::array<double, 4>& weights);

// 10 "artists" x 10 images. Each artist has an independent base image with
// pixels uniform in [0.1, 0.9]; anchor k of an artist is the base plus
// N(0, sigma^2) pixel noise, and candidate k is anchor k plus another
// N(0, sigma^2) draw. Images are clamped to [0, 1] and run through refnet.
struct ArtistFixture {
  std::vector<FeatureBundle> anchors;
  std::vector<FeatureBundle> candidates;
  std::vector<std::string> groups;  // artist label per anchor / candidate
};

ArtistFixture make_artist_fixture(std::size_t artists = 10, std::size_t per_artist = 10,
                                  double sigma = 0.01, std::size_t image_size = 32,
                                  std::uint64_t seed = kArtistFixtureSeed);

analysis::SimilarityMatrix artist_matrix(const ArtistFixture& f, const metric::MetricConfig& cfg,
                                         unsigned jobs = 1,
                                         analysis::Variant variant = analysis::Variant::kCm,
                                         bool loss_valued = false);

Tensor random_image(Xorshift64Star& rng, std::size_t size, double lo = 0.0, double hi = 1.0);

// Random valid bundle with axes up to `max_axis` elements.
FeatureBundle random_bundle(Xorshift64Star& rng, std::size_t max_axis);

Tensor random_vector(Xorshift64Star& rng, std::size_t n, double lo = -1.0, double hi = 1.0);

// The standard toy fixture: default 8 -> 16 -> 16 -> 4 model and one
// random target with x, y uniform in [-1, 1].
refnet::ToyModel standard_toy_model();
unlearn::TargetPair standard_target();

// Random (model, x, target) whose relu pre-activations all exceed `margin`
// in magnitude; retries sub-seeds until one qualifies.
struct GuardedCase {
  refnet::ToyModel model;
  Tensor x;
  Tensor target;
};
GuardedCase kink_guarded_case(std::uint64_t seed, double margin);

}  // namespace cpdm::testing

#endif  // CPDM_TESTS_SUPPORT_FIXTURES_HPP_
