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

#ifndef CPDM_REFNET_HPP_
#define CPDM_REFNET_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>

#include "cpdm/bundle.hpp"
#include "cpdm/tensor.hpp"

namespace cpdm::refnet {

inline constexpr std::uint64_t kDefaultSeed = 0x5EEDC0DEULL;
inline constexpr std::array<std::size_t, 5> kChannelPlan = {3, 8, 16, 32, 64};
inline constexpr std::size_t kSizeMultiple = 16;
inline constexpr const char* kExtractorTag = "refnet";

// Fixed-weight 4-stage convolutional feature extractor. Each stage is a
// 3x3 convolution with stride 2 and padding 1 followed by ReLU; biases are
// zero. Kernels are [out, in, 3, 3] and are a pure function of the seed.
class RefExtractor {
 public:
  explicit RefExtractor(std::uint64_t seed = kDefaultSeed);

  std::uint64_t seed() const { return seed_; }
  const std::array<Tensor, 4>& kernels() const { return kernels_; }

 private:
  std::uint64_t seed_;
  std::array<Tensor, 4> kernels_;
};

// Pre-activation 3x3 convolution, stride 2, zero padding 1.
// input [in, H, W], kernel [out, in, 3, 3] -> [out, ceil(H/2), ceil(W/2)].
// Each output is a dot product accumulated in f64 in ascending
// (in_channel, ky, kx) order, then rounded to f32.
Tensor conv3x3_stride2(const Tensor& input, const Tensor& kernel);

void relu_inplace(Tensor& t);

// image: [3, H, W] with H, W multiples of 16 and pixels in [0, 1].
// Stage l of the bundle is the post-ReLU output of stage l; the embedding
// is the 64-channel global average pool of stage 4.
FeatureBundle forward_features(const Tensor& image, const RefExtractor& extractor,
                               std::string image_id = {});

}  // namespace cpdm::refnet

#endif  // CPDM_REFNET_HPP_
