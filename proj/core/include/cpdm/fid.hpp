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

#ifndef CPDM_FID_HPP_
#define CPDM_FID_HPP_

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "cpdm/tensor.hpp"

namespace cpdm::metric {

// Gaussian fit of an embedding set. Held in f64; covariance is row-major.
struct GaussianStats {
  std::vector<double> mean;
  std::vector<double> covariance;
  std::size_t sample_count = 0;

  std::size_t dim() const { return mean.size(); }
  double cov(std::size_t i, std::size_t j) const { return covariance[i * mean.size() + j]; }
};

// Sample mean and unbiased covariance (1/(n-1)), symmetrized. Needs at
// least two equal-length rank-1 samples.
GaussianStats gaussian_stats(std::span<const Tensor> embeddings);

// ||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a^1/2 S_b S_a^1/2)^1/2), using
// symmetric eigendecompositions with negative eigenvalues floored at 0.
double fid(const GaussianStats& a, const GaussianStats& b);

// Statistics files reuse the bundle container with entries "mean" [d],
// "covariance" [d, d] and "sample_count" [1]. Values are stored as f32.
void save_stats(const GaussianStats& stats, const std::filesystem::path& path);
GaussianStats load_stats(const std::filesystem::path& path);

}  // namespace cpdm::metric

#endif  // CPDM_FID_HPP_
