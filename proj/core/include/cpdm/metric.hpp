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

#ifndef CPDM_METRIC_HPP_
#define CPDM_METRIC_HPP_

#include <array>
#include <span>
#include <string>
#include <vector>

#include "cpdm/bundle.hpp"
#include "cpdm/tensor.hpp"

namespace cpdm::metric {

inline constexpr std::array<double, 4> kDefaultLayerWeights = {0.5, 0.1, 6e4, 4.0};
inline constexpr std::array<double, 4> kUniformLayerWeights = {1.0, 1.0, 1.0, 1.0};

struct MetricConfig {
  std::array<double, 4> layer_weights = kDefaultLayerWeights;
  double clip_lo = 1.0;
  double clip_hi = 50.0;
  bool clamp_cm = true;

  // Throws ValidationError: weights must be finite and non-negative,
  // clip_hi > clip_lo.
  void validate() const;
};

struct MetricReport {
  double m_sem = 0.0;
  std::array<double, 4> layer_distances{};
  double m_style = 0.0;
  double product = 0.0;  // m_sem * m_style
  double cm = 0.0;
  double cm_percent = 0.0;
};

// Mean squared difference of two embeddings, accumulated in f64.
double semantic_metric(const Tensor& a, const Tensor& b);

// G = A A^T / (H W) for the [C, H*W] flattening A of a [C, H, W] map.
Tensor gram(const Tensor& feature_map);

// Mean over all C^2 entries of the squared difference.
double layer_distance(const Tensor& gram_a, const Tensor& gram_b);

// f64 forms of gram / layer_distance; the metric itself runs on these so
// Gram entries are never rounded to f32.
std::vector<double> gram_f64(const Tensor& feature_map);
double gram_distance(std::span<const double> gram_a, std::span<const double> gram_b);

struct StyleResult {
  std::array<double, 4> layer_distances{};
  double m_style = 0.0;
};

StyleResult style_metric(const FeatureBundle& a, const FeatureBundle& b, const MetricConfig& cfg);

// Clip to [clip_lo, clip_hi], then divide by (clip_hi - clip_lo).
double normalize(double x, const MetricConfig& cfg);

// 1 - normalize(x)^2, floored at 0 when cfg.clamp_cm.
double similarity_from_product(double x, const MetricConfig& cfg);

MetricReport cpdm_metric(const FeatureBundle& a, const FeatureBundle& b, const MetricConfig& cfg);

// 100 * (cos(unlearned, text) - cos(generated, text)). Negative values mean
// the unlearned image lost alignment with the prompt.
double delta_clip(const Tensor& emb_gen, const Tensor& emb_unl, const Tensor& text_emb);

double cosine(std::span<const float> a, std::span<const float> b);

// {"m_sem", "layer_distances", "m_style", "product", "cm", "cm_percent"}
// with 6-decimal numbers.
std::string to_json(const MetricReport& report);
std::string to_plain(const MetricReport& report);

}  // namespace cpdm::metric

#endif  // CPDM_METRIC_HPP_
