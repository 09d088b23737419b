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

#include "cpdm/fid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include <Eigen/Dense>

#include "cpdm/bundle.hpp"
#include "cpdm/error.hpp"

namespace cpdm::metric {
namespace {

constexpr double kSymmetryTolerance = 1e-9;

Eigen::MatrixXd as_matrix(const GaussianStats& s) {
  const auto d = static_cast<Eigen::Index>(s.dim());
  if (s.covariance.size() != s.dim() * s.dim()) {
    throw ShapeError("covariance does not match mean dimension");
  }
  Eigen::MatrixXd m(d, d);
  double scale = 1.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      m(i, j) = s.covariance[static_cast<std::size_t>(i * d + j)];
      scale = std::max(scale, std::abs(m(i, j)));
    }
  }
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * scale) {
    throw ValidationError("covariance is not symmetric");
  }
  return m;
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  Eigen::VectorXd roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

GaussianStats gaussian_stats(std::span<const Tensor> embeddings) {
  if (embeddings.size() < 2) {
    throw ValidationError("gaussian_stats needs at least 2 samples, got " +
                          std::to_string(embeddings.size()));
  }
  const std::size_t d = embeddings.front().size();
  for (const Tensor& e : embeddings) {
    if (e.rank() != 1 || e.size() != d) {
      throw ShapeError("all embeddings must be rank-1 of length " + std::to_string(d));
    }
  }
  const double n = static_cast<double>(embeddings.size());
  GaussianStats s;
  s.sample_count = embeddings.size();
  s.mean.assign(d, 0.0);
  for (const Tensor& e : embeddings) {
    for (std::size_t i = 0; i < d; ++i) s.mean[i] += e[i];
  }
  for (double& m : s.mean) m /= n;

  s.covariance.assign(d * d, 0.0);
  for (const Tensor& e : embeddings) {
    for (std::size_t i = 0; i < d; ++i) {
      const double di = e[i] - s.mean[i];
      for (std::size_t j = 0; j < d; ++j) s.covariance[i * d + j] += di * (e[j] - s.mean[j]);
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      const double v = 0.5 * (s.covariance[i * d + j] + s.covariance[j * d + i]) / (n - 1.0);
      s.covariance[i * d + j] = s.covariance[j * d + i] = v;
    }
  }
  return s;
}

double fid(const GaussianStats& a, const GaussianStats& b) {
  if (a.dim() != b.dim() || a.dim() == 0) {
    throw ShapeError("FID statistics have dimensions " + std::to_string(a.dim()) + " and " +
                     std::to_string(b.dim()));
  }
  const Eigen::MatrixXd sa = as_matrix(a);
  const Eigen::MatrixXd sb = as_matrix(b);

  double mean_term = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double d = a.mean[i] - b.mean[i];
    mean_term += d * d;
  }

  const Eigen::MatrixXd root_a = psd_sqrt(sa);
  Eigen::MatrixXd inner = root_a * sb * root_a;
  inner = 0.5 * (inner + inner.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(inner, Eigen::EigenvaluesOnly);
  const double cross = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();

  const double value = mean_term + sa.trace() + sb.trace() - 2.0 * cross;
  return std::max(value, 0.0);
}

void save_stats(const GaussianStats& stats, const std::filesystem::path& path) {
  const std::size_t d = stats.dim();
  std::vector<Entry> entries;
  entries.push_back({"mean", Tensor({d}, std::vector<float>(stats.mean.begin(), stats.mean.end()))});
  entries.push_back({"covariance", Tensor({d, d}, std::vector<float>(stats.covariance.begin(),
                                                                     stats.covariance.end()))});
  entries.push_back(
      {"sample_count", Tensor({1}, std::vector<float>{static_cast<float>(stats.sample_count)})});
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_entries(entries, out);
}

GaussianStats load_stats(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::vector<Entry> entries = read_entries(in);
  auto find = [&](const std::string& name) -> const Tensor* {
    for (const Entry& e : entries) {
      if (e.name == name) return &e.tensor;
    }
    return nullptr;
  };
  const Tensor* mean = find("mean");
  const Tensor* cov = find("covariance");
  if (!mean || !cov) {
    throw FormatError(path.string() + " is not a statistics file (needs 'mean' and 'covariance')");
  }
  const std::size_t d = mean->size();
  if (mean->rank() != 1 || cov->rank() != 2 || cov->dim(0) != d || cov->dim(1) != d) {
    throw ShapeError(path.string() + ": covariance shape does not match mean");
  }
  GaussianStats s;
  s.mean.assign(mean->values().begin(), mean->values().end());
  s.covariance.assign(cov->values().begin(), cov->values().end());
  if (const Tensor* n = find("sample_count")) s.sample_count = static_cast<std::size_t>((*n)[0]);
  return s;
}

}  // namespace cpdm::metric
