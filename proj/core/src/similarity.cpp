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

#include "cpdm/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <vector>

#include "cpdm/csv.hpp"
#include "cpdm/error.hpp"
#include "cpdm/format.hpp"
#include "cpdm/image_io.hpp"

namespace cpdm::analysis {
namespace {

constexpr std::string_view kCornerCell = "anchor\\candidate";

// Gram matrices computed once per bundle instead of once per pair.
struct Prepared {
  const Tensor* embedding;
  std::array<std::vector<double>, 4> grams;
};

Prepared prepare(const FeatureBundle& b) {
  Prepared p{&b.embedding, {}};
  for (std::size_t l = 0; l < 4; ++l) p.grams[l] = metric::gram_f64(b.stages[l]);
  return p;
}

}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kCm: return "cm";
    case Variant::kSem: return "sem";
    case Variant::kStyle: return "style";
    case Variant::kSum: return "sum";
    case Variant::kSum2: return "sum2";
    case Variant::kProd2: return "prod2";
  }
  return "cm";
}

Variant variant_from_string(const std::string& s) {
  for (Variant v : {Variant::kCm, Variant::kSem, Variant::kStyle, Variant::kSum, Variant::kSum2,
                    Variant::kProd2}) {
    if (to_string(v) == s) return v;
  }
  throw ValidationError("unknown variant '" + s + "'");
}

double combine(Variant v, double m_sem, double m_style) {
  switch (v) {
    case Variant::kCm: return m_sem * m_style;
    case Variant::kSem: return m_sem;
    case Variant::kStyle: return m_style;
    case Variant::kSum: return m_sem + m_style;
    case Variant::kSum2: return m_sem * m_sem + m_style;
    case Variant::kProd2: return (m_sem * m_style) * (m_sem * m_style);
  }
  return m_sem * m_style;
}

SimilarityMatrix build_matrix(std::span<const FeatureBundle> anchors,
                              std::span<const FeatureBundle> candidates,
                              const metric::MetricConfig& cfg, Variant variant, unsigned jobs,
                              bool loss_valued) {
  cfg.validate();
  std::string offenders;
  std::size_t offender_count = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    for (std::size_t j = 0; j < anchors.size(); ++j) {
      PairReport pr = validate_pair(candidates[i], anchors[j]);
      if (pr.ok()) continue;
      if (++offender_count <= 20) {
        offenders += "\n  candidate " + std::to_string(i) + " '" + candidates[i].image_id +
                     "' vs anchor " + std::to_string(j) + " '" + anchors[j].image_id +
                     "': " + pr.to_string();
      }
    }
  }
  if (offender_count > 0) {
    if (offender_count > 20) offenders += "\n  ... " + std::to_string(offender_count - 20) + " more";
    throw ShapeError(std::to_string(offender_count) + " incompatible pair(s):" + offenders);
  }

  SimilarityMatrix m;
  m.loss_valued = loss_valued;
  for (const FeatureBundle& b : anchors) m.anchor_labels.push_back(b.image_id);
  for (const FeatureBundle& b : candidates) m.candidate_labels.push_back(b.image_id);
  m.values.assign(candidates.size() * anchors.size(), 0.0);

  std::vector<Prepared> pa, pc;
  pa.reserve(anchors.size());
  pc.reserve(candidates.size());
  for (const FeatureBundle& b : anchors) pa.push_back(prepare(b));
  for (const FeatureBundle& b : candidates) pc.push_back(prepare(b));

  // Each worker owns the rows i with i % workers == id, so writes never
  // overlap and every cell is computed by the same code path.
  auto work = [&](std::size_t id, std::size_t workers) {
    for (std::size_t i = id; i < pc.size(); i += workers) {
      for (std::size_t j = 0; j < pa.size(); ++j) {
        const double sem = metric::semantic_metric(*pc[i].embedding, *pa[j].embedding);
        double style = 0.0;
        for (std::size_t l = 0; l < 4; ++l) {
          style += cfg.layer_weights[l] * metric::gram_distance(pc[i].grams[l], pa[j].grams[l]);
        }
        const double x = combine(variant, sem, style);
        m.values[i * pa.size() + j] = loss_valued ? x : metric::similarity_from_product(x, cfg);
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(pc.size(), 1));
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t id = 0; id < workers; ++id) pool.emplace_back(work, id, workers);
  }
  return m;
}

double diagonal_accuracy(const SimilarityMatrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw ShapeError("diagonal accuracy needs a non-empty square matrix, got " +
                     std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double d = m.at(i, i);
    bool strict = true;
    for (std::size_t j = 0; j < m.cols() && strict; ++j) {
      if (j == i) continue;
      if (m.loss_valued ? !(m.at(i, j) > d) : !(m.at(i, j) < d)) strict = false;
    }
    if (strict) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(m.rows());
}

double cluster_contrast(const SimilarityMatrix& m) {
  if (m.anchor_groups.size() != m.cols() || m.candidate_groups.size() != m.rows()) {
    throw ValidationError("cluster contrast needs a group label for every anchor and candidate");
  }
  double same = 0.0, cross = 0.0;
  std::size_t n_same = 0, n_cross = 0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (m.candidate_groups[i] == m.anchor_groups[j]) {
        same += m.at(i, j);
        ++n_same;
      } else {
        cross += m.at(i, j);
        ++n_cross;
      }
    }
  }
  if (n_same == 0 || n_cross == 0) {
    throw ValidationError("cluster contrast needs both same-group and cross-group pairs");
  }
  return same / static_cast<double>(n_same) - cross / static_cast<double>(n_cross);
}

std::string render_heatmap(const SimilarityMatrix& m, bool invert) {
  if (m.values.empty()) throw ShapeError("cannot render an empty matrix");
  const auto [lo_it, hi_it] = std::minmax_element(m.values.begin(), m.values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  std::vector<std::uint8_t> px(m.values.size(), 128);
  if (hi > lo) {
    for (std::size_t k = 0; k < m.values.size(); ++k) {
      auto p = static_cast<int>(std::lround(255.0 * (m.values[k] - lo) / (hi - lo)));
      if (invert) p = 255 - p;
      px[k] = static_cast<std::uint8_t>(p);
    }
  }
  return write_pgm(m.cols(), m.rows(), px,
                   "cpdm matrix " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
}

std::string to_csv(const SimilarityMatrix& m) {
  std::string out(kCornerCell);
  for (const std::string& c : m.candidate_labels) out += "," + csv_field(c);
  out += "\n";
  for (std::size_t j = 0; j < m.cols(); ++j) {
    out += csv_field(m.anchor_labels[j]);
    for (std::size_t i = 0; i < m.rows(); ++i) {
      out += "," + (m.loss_valued ? significant(m.at(i, j), 9) : fixed6(m.at(i, j)));
    }
    out += "\n";
  }
  return out;
}

SimilarityMatrix matrix_from_csv(const std::string& text) {
  const auto rows = parse_csv(text);
  if (rows.empty() || rows[0].empty() || rows[0][0] != kCornerCell) {
    throw FormatError("matrix CSV must start with \"anchor\\candidate\"");
  }
  SimilarityMatrix m;
  m.candidate_labels.assign(rows[0].begin() + 1, rows[0].end());
  const std::size_t n_cand = m.candidate_labels.size();
  const std::size_t n_anchor = rows.size() - 1;
  m.values.assign(n_cand * n_anchor, 0.0);
  for (std::size_t j = 0; j < n_anchor; ++j) {
    const auto& r = rows[j + 1];
    if (r.size() != n_cand + 1) {
      throw FormatError("matrix CSV row " + std::to_string(j + 2) + " has " +
                        std::to_string(r.size()) + " cells, expected " +
                        std::to_string(n_cand + 1));
    }
    m.anchor_labels.push_back(r[0]);
    for (std::size_t i = 0; i < n_cand; ++i) m.values[i * n_anchor + j] = parse_double(r[i + 1]);
  }
  return m;
}

}  // namespace cpdm::analysis
