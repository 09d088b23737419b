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

#include "cpdm/metric.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "cpdm/error.hpp"
#include "cpdm/format.hpp"

namespace cpdm::metric {

std::vector<double> gram_f64(const Tensor& fm) {
  if (fm.rank() != 3) {
    throw ShapeError("feature map must be [C, H, W], got " + shape_string(fm.shape()));
  }
  const std::size_t c = fm.dim(0);
  const std::size_t plane = fm.dim(1) * fm.dim(2);
  const double scale = 1.0 / static_cast<double>(plane);
  auto v = fm.values();
  std::vector<double> g(c * c);
  for (std::size_t i = 0; i < c; ++i) {
    for (std::size_t j = i; j < c; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < plane; ++p) {
        acc += static_cast<double>(v[i * plane + p]) * static_cast<double>(v[j * plane + p]);
      }
      g[i * c + j] = g[j * c + i] = acc * scale;
    }
  }
  return g;
}

double gram_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) throw ShapeError("gram sizes differ");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

void MetricConfig::validate() const {
  for (double w : layer_weights) {
    if (!std::isfinite(w) || w < 0.0) {
      throw ValidationError("layer weights must be finite and non-negative");
    }
  }
  if (!std::isfinite(clip_lo) || !std::isfinite(clip_hi) || !(clip_hi > clip_lo)) {
    throw ValidationError("clip range needs finite lo < hi");
  }
}

double semantic_metric(const Tensor& a, const Tensor& b) {
  if (a.rank() != 1 || b.rank() != 1 || a.size() != b.size()) {
    throw ShapeError("embeddings " + shape_string(a.shape()) + " and " + shape_string(b.shape()) +
                     " are not equal-length vectors");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

Tensor gram(const Tensor& feature_map) {
  const std::vector<double> g = gram_f64(feature_map);
  const std::size_t c = feature_map.dim(0);
  std::vector<float> out(g.begin(), g.end());
  return Tensor({c, c}, std::move(out));
}

double layer_distance(const Tensor& gram_a, const Tensor& gram_b) {
  if (gram_a.shape() != gram_b.shape()) {
    throw ShapeError("gram shapes " + shape_string(gram_a.shape()) + " and " +
                     shape_string(gram_b.shape()) + " differ");
  }
  std::vector<double> a(gram_a.values().begin(), gram_a.values().end());
  std::vector<double> b(gram_b.values().begin(), gram_b.values().end());
  return gram_distance(a, b);
}

StyleResult style_metric(const FeatureBundle& a, const FeatureBundle& b, const MetricConfig& cfg) {
  StyleResult r;
  for (std::size_t l = 0; l < 4; ++l) {
    const Tensor& sa = a.stages[l];
    const Tensor& sb = b.stages[l];
    if (sa.rank() != 3 || sb.rank() != 3 || sa.dim(0) != sb.dim(0)) {
      throw ShapeError(std::string(kStageEntries[l]) + ": channel mismatch " +
                       shape_string(sa.shape()) + " vs " + shape_string(sb.shape()));
    }
    r.layer_distances[l] = gram_distance(gram_f64(sa), gram_f64(sb));
    r.m_style += cfg.layer_weights[l] * r.layer_distances[l];
  }
  return r;
}

double normalize(double x, const MetricConfig& cfg) {
  return std::clamp(x, cfg.clip_lo, cfg.clip_hi) / (cfg.clip_hi - cfg.clip_lo);
}

double similarity_from_product(double x, const MetricConfig& cfg) {
  const double n = normalize(x, cfg);
  double cm = 1.0 - n * n;
  if (cfg.clamp_cm) cm = std::max(cm, 0.0);
  return cm;
}

MetricReport cpdm_metric(const FeatureBundle& a, const FeatureBundle& b, const MetricConfig& cfg) {
  cfg.validate();
  if (PairReport pr = validate_pair(a, b); !pr.ok()) {
    throw ShapeError("incompatible bundles: " + pr.to_string());
  }
  MetricReport r;
  r.m_sem = semantic_metric(a.embedding, b.embedding);
  StyleResult s = style_metric(a, b, cfg);
  r.layer_distances = s.layer_distances;
  r.m_style = s.m_style;
  r.product = r.m_sem * r.m_style;
  r.cm = similarity_from_product(r.product, cfg);
  r.cm_percent = r.cm * 100.0;
  return r;
}

double cosine(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size() || a.empty()) {
    throw ShapeError("cosine needs equal-length non-empty vectors");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw ValidationError("cosine of a zero-norm vector");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

double delta_clip(const Tensor& emb_gen, const Tensor& emb_unl, const Tensor& text_emb) {
  return 100.0 * (cosine(emb_unl.values(), text_emb.values()) -
                  cosine(emb_gen.values(), text_emb.values()));
}

std::string to_json(const MetricReport& r) {
  std::string s = "{\"m_sem\": " + fixed6(r.m_sem) + ", \"layer_distances\": [";
  for (std::size_t l = 0; l < 4; ++l) {
    if (l > 0) s += ", ";
    s += fixed6(r.layer_distances[l]);
  }
  s += "], \"m_style\": " + fixed6(r.m_style) + ", \"product\": " + fixed6(r.product) +
       ", \"cm\": " + fixed6(r.cm) + ", \"cm_percent\": " + fixed6(r.cm_percent) + "}";
  return s;
}

std::string to_plain(const MetricReport& r) {
  std::string s = "m_sem " + fixed6(r.m_sem) + "\nlayer_distances";
  for (double d : r.layer_distances) s += " " + fixed6(d);
  s += "\nm_style " + fixed6(r.m_style) + "\nproduct " + fixed6(r.product) + "\ncm " +
       fixed6(r.cm) + "\ncm_percent " + fixed6(r.cm_percent) + "\n";
  return s;
}

}  // namespace cpdm::metric
