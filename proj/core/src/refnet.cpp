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

#include "cpdm/refnet.hpp"

#include <utility>

#include "cpdm/error.hpp"
#include "cpdm/prng.hpp"

namespace cpdm::refnet {

RefExtractor::RefExtractor(std::uint64_t seed) : seed_(seed) {
  Xorshift64Star rng(seed);
  for (std::size_t l = 0; l < kernels_.size(); ++l) {
    Tensor k({kChannelPlan[l + 1], kChannelPlan[l], 3, 3});
    for (float& w : k.values()) w = rng.weight();
    kernels_[l] = std::move(k);
  }
}

Tensor conv3x3_stride2(const Tensor& input, const Tensor& kernel) {
  if (input.rank() != 3) {
    throw ShapeError("conv input must be rank-3, got " + shape_string(input.shape()));
  }
  if (kernel.rank() != 4 || kernel.dim(2) != 3 || kernel.dim(3) != 3 ||
      kernel.dim(1) != input.dim(0)) {
    throw ShapeError("kernel " + shape_string(kernel.shape()) + " does not fit input " +
                     shape_string(input.shape()));
  }
  const std::size_t in_ch = input.dim(0);
  const std::size_t h = input.dim(1);
  const std::size_t w = input.dim(2);
  const std::size_t out_ch = kernel.dim(0);
  const std::size_t oh = (h + 1) / 2;
  const std::size_t ow = (w + 1) / 2;

  Tensor out({out_ch, oh, ow});
  auto in = input.values();
  auto k = kernel.values();
  for (std::size_t o = 0; o < out_ch; ++o) {
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t x = 0; x < ow; ++x) {
        double acc = 0.0;
        for (std::size_t c = 0; c < in_ch; ++c) {
          for (std::size_t ky = 0; ky < 3; ++ky) {
            // Source row 2y - 1 + ky; padding contributes nothing.
            const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(2 * y + ky) - 1;
            if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(h)) continue;
            for (std::size_t kx = 0; kx < 3; ++kx) {
              const std::ptrdiff_t sx = static_cast<std::ptrdiff_t>(2 * x + kx) - 1;
              if (sx < 0 || sx >= static_cast<std::ptrdiff_t>(w)) continue;
              const double wv = k[((o * in_ch + c) * 3 + ky) * 3 + kx];
              const double iv = in[(c * h + static_cast<std::size_t>(sy)) * w +
                                   static_cast<std::size_t>(sx)];
              acc += wv * iv;
            }
          }
        }
        out.at(o, y, x) = static_cast<float>(acc);
      }
    }
  }
  return out;
}

void relu_inplace(Tensor& t) {
  for (float& v : t.values()) {
    if (!(v > 0.0f)) v = 0.0f;
  }
}

FeatureBundle forward_features(const Tensor& image, const RefExtractor& extractor,
                               std::string image_id) {
  if (image.rank() != 3 || image.dim(0) != kChannelPlan[0]) {
    throw ShapeError("image must be [3, H, W], got " + shape_string(image.shape()));
  }
  if (image.dim(1) % kSizeMultiple != 0 || image.dim(2) % kSizeMultiple != 0) {
    throw ShapeError("image height and width must be multiples of 16, got " +
                     shape_string(image.shape()));
  }
  auto px = image.values();
  for (std::size_t i = 0; i < px.size(); ++i) {
    if (px[i] < 0.0f || px[i] > 1.0f) {
      throw ValidationError("pixel " + std::to_string(i) + " = " + std::to_string(px[i]) +
                            " outside [0, 1]");
    }
  }

  FeatureBundle bundle;
  bundle.image_id = std::move(image_id);
  bundle.extractor_tag = kExtractorTag;
  const Tensor* current = &image;
  for (std::size_t l = 0; l < 4; ++l) {
    Tensor stage = conv3x3_stride2(*current, extractor.kernels()[l]);
    relu_inplace(stage);
    bundle.stages[l] = std::move(stage);
    current = &bundle.stages[l];
  }

  const Tensor& last = bundle.stages[3];
  const std::size_t channels = last.dim(0);
  const std::size_t plane = last.dim(1) * last.dim(2);
  Tensor embedding({channels});
  auto v = last.values();
  for (std::size_t c = 0; c < channels; ++c) {
    double acc = 0.0;
    for (std::size_t i = 0; i < plane; ++i) acc += v[c * plane + i];
    embedding[c] = static_cast<float>(acc / static_cast<double>(plane));
  }
  bundle.embedding = std::move(embedding);
  return bundle;
}

}  // namespace cpdm::refnet
