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

#include <benchmark/benchmark.h>

#include <vector>

#include "cpdm/fid.hpp"
#include "cpdm/metric.hpp"
#include "cpdm/prng.hpp"
#include "cpdm/refnet.hpp"
#include "cpdm/similarity.hpp"

namespace {

using namespace cpdm;

Tensor random_tensor(Xorshift64Star& rng, std::vector<std::size_t> shape, double lo, double hi) {
  Tensor t(std::move(shape));
  for (float& v : t.values()) v = static_cast<float>(rng.uniform(lo, hi));
  return t;
}

std::vector<FeatureBundle> refnet_bundles(std::size_t n, std::size_t size) {
  Xorshift64Star rng(1);
  const refnet::RefExtractor e;
  std::vector<FeatureBundle> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(refnet::forward_features(random_tensor(rng, {3, size, size}, 0, 1), e));
  return out;
}

void BM_Gram(benchmark::State& state) {
  Xorshift64Star rng(2);
  const auto c = static_cast<std::size_t>(state.range(0));
  const Tensor fm = random_tensor(rng, {c, 32, 32}, -1, 1);
  for (auto _ : state) benchmark::DoNotOptimize(metric::gram(fm));
}
BENCHMARK(BM_Gram)->Arg(8)->Arg(32)->Arg(64);

void BM_ForwardFeatures(benchmark::State& state) {
  Xorshift64Star rng(3);
  const auto size = static_cast<std::size_t>(state.range(0));
  const Tensor img = random_tensor(rng, {3, size, size}, 0, 1);
  const refnet::RefExtractor e;
  for (auto _ : state) benchmark::DoNotOptimize(refnet::forward_features(img, e));
}
BENCHMARK(BM_ForwardFeatures)->Arg(32)->Arg(64)->Arg(128);

void BM_CpdmMetric(benchmark::State& state) {
  const auto bs = refnet_bundles(2, static_cast<std::size_t>(state.range(0)));
  const metric::MetricConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(metric::cpdm_metric(bs[0], bs[1], cfg));
}
BENCHMARK(BM_CpdmMetric)->Arg(32)->Arg(128);

void BM_Fid(benchmark::State& state) {
  Xorshift64Star rng(4);
  const auto dim = static_cast<std::size_t>(state.range(0));
  std::vector<Tensor> a, b;
  for (std::size_t i = 0; i < 2 * dim; ++i) {
    a.push_back(random_tensor(rng, {dim}, -1, 1));
    b.push_back(random_tensor(rng, {dim}, -1, 1));
  }
  const auto sa = metric::gaussian_stats(a);
  const auto sb = metric::gaussian_stats(b);
  for (auto _ : state) benchmark::DoNotOptimize(metric::fid(sa, sb));
}
BENCHMARK(BM_Fid)->Arg(64)->Arg(256);

void BM_BuildMatrix(benchmark::State& state) {
  const auto bs = refnet_bundles(20, 32);
  const metric::MetricConfig cfg;
  const auto jobs = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(analysis::build_matrix(bs, bs, cfg, analysis::Variant::kCm, jobs));
}
BENCHMARK(BM_BuildMatrix)->Arg(1)->Arg(4)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
