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

#ifndef CPDM_SIMILARITY_HPP_
#define CPDM_SIMILARITY_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cpdm/bundle.hpp"
#include "cpdm/metric.hpp"

namespace cpdm::analysis {

// How semantic and style distances are combined into the quantity x that
// goes through 1 - Norm(x)^2:
//   kCm    x = M_sem * M_style        (the CPDM metric)
//   kSem   x = M_sem
//   kStyle x = M_style
//   kSum   x = M_sem + M_style
//   kSum2  x = M_sem^2 + M_style
//   kProd2 x = (M_sem * M_style)^2
enum class Variant { kCm, kSem, kStyle, kSum, kSum2, kProd2 };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);
double combine(Variant v, double m_sem, double m_style);

// values is row-major [candidates x anchors]: row i is candidate i, column j
// is anchor j. Group vectors are either empty or one label per entry.
// A loss-valued matrix holds the raw combined distance x (lower = more
// similar) instead of 1 - Norm(x)^2.
struct SimilarityMatrix {
  std::vector<std::string> anchor_labels;
  std::vector<std::string> candidate_labels;
  std::vector<std::string> anchor_groups;
  std::vector<std::string> candidate_groups;
  std::vector<double> values;
  bool loss_valued = false;

  std::size_t rows() const { return candidate_labels.size(); }
  std::size_t cols() const { return anchor_labels.size(); }
  double at(std::size_t candidate, std::size_t anchor) const {
    return values[candidate * cols() + anchor];
  }
};

// values[i][j] = similarity(candidate i, anchor j), or the raw distance x
// when loss_valued. Labels come from the bundles' image_id. Pairs are
// evaluated on up to `jobs` threads; the result does not depend on `jobs`.
// Incompatible pairs raise one ShapeError listing every offender.
SimilarityMatrix build_matrix(std::span<const FeatureBundle> anchors,
                              std::span<const FeatureBundle> candidates,
                              const metric::MetricConfig& cfg, Variant variant = Variant::kCm,
                              unsigned jobs = 1, bool loss_valued = false);

// Fraction of rows whose strict best entry is on the diagonal (maximum, or
// minimum for loss-valued matrices). Ties fail.
double diagonal_accuracy(const SimilarityMatrix& m);

// Mean over same-group (candidate, anchor) cells minus mean over
// cross-group cells.
double cluster_contrast(const SimilarityMatrix& m);

// Binary PGM, one pixel per cell, min-max scaled to 0..255 (128 when the
// matrix is constant). invert flips the ramp for loss-valued matrices.
std::string render_heatmap(const SimilarityMatrix& m, bool invert);

// First cell "anchor\candidate", header = candidate labels, one row per
// anchor. Similarities use 6 decimals; loss values use 9 significant digits
// since refnet-scale distances are far below 1e-6.
std::string to_csv(const SimilarityMatrix& m);
SimilarityMatrix matrix_from_csv(const std::string& text);

}  // namespace cpdm::analysis

#endif  // CPDM_SIMILARITY_HPP_
