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

#ifndef CPDM_UNLEARNING_HPP_
#define CPDM_UNLEARNING_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cpdm/bundle.hpp"
#include "cpdm/metric.hpp"
#include "cpdm/refnet.hpp"
#include "cpdm/tensor.hpp"
#include "cpdm/toy_model.hpp"

namespace cpdm::unlearn {

using refnet::ToyModel;

struct GAConfig {
  double eta = 5.0e-5;
  int epochs = 5;

  // eta must be finite and >= 0 (0 is the identity), epochs >= 1.
  void validate() const;
};

struct PruneSpec {
  double p_c = 0.1;   // fraction of units selected per layer by |Y|
  double p_w = 0.03;  // fraction of weights zeroed per selected row by |grad|

  void validate() const;
};

// x stands in for the prompt, y for the image to forget.
struct TargetPair {
  Tensor x;
  Tensor y;
};

struct StepRecord {
  int epoch = 0;
  std::size_t target_id = 0;
  double loss = 0.0;  // loss before the step
};

struct PrunedLayer {
  std::size_t target_id = 0;
  std::size_t layer = 0;
  std::vector<std::size_t> rows;                              // selection order
  std::vector<std::pair<std::size_t, std::size_t>> zeroed;    // (row, col)
};

struct UnlearnTrace {
  std::vector<StepRecord> steps;
  std::vector<PrunedLayer> pruned;
  ToyModel original;
  ToyModel unlearned;
  std::optional<double> cm_before;
  std::optional<double> cm_after;
};

// max(1, floor(fraction * n)), never more than n.
std::size_t rounded_count(double fraction, std::size_t n);

struct GaStepResult {
  ToyModel model;
  double loss = 0.0;  // before the update
};

// p <- p + eta * dL/dp for every weight and bias.
GaStepResult ga_step(ToyModel model, const TargetPair& target, double eta);

// `epochs` passes over the targets in order, one ga_step each.
UnlearnTrace ga_run(const ToyModel& model, std::span<const TargetPair> targets, const GAConfig& cfg);

// Per layer, the k = rounded_count(p_c, rows) units with the largest
// |pre-activation|, ties to the lower index, in selection order.
std::vector<std::vector<std::size_t>> wp_select(const refnet::ForwardRecord& record, double p_c);

struct WpPruneResult {
  ToyModel model;
  std::vector<PrunedLayer> layers;  // one per model layer
};

// In every selected row, zero the rounded_count(p_w, cols) weights with the
// largest |gradient|, ties to the lower column. Biases and unselected rows
// are untouched. `selected` may list fewer layers than the model has.
WpPruneResult wp_prune(ToyModel model, const refnet::GradientRecord& grads,
                       std::span<const std::vector<std::size_t>> selected, double p_w);

// One forward/backward/select/prune pass per target, in order; no other
// weight updates.
UnlearnTrace wp_run(const ToyModel& model, std::span<const TargetPair> targets, const PruneSpec& spec);

// Prompt stand-in for a probe image: the mean of each of `n` horizontal
// bands, mapped from [0, 1] to [-1, 1].
Tensor probe_prompt(const Tensor& image, std::size_t n);

// Toy regeneration: the model output modulates the probe image,
// pixel(c, y, x) = clamp(image + 0.25 tanh(out[(c + y + x) mod n]), 0, 1).
Tensor render_generation(std::span<const double> output, const Tensor& image);

// forward_features(render_generation(model(probe_prompt(image)), image)).
FeatureBundle generate_features(const ToyModel& model, const Tensor& probe_image,
                                const refnet::RefExtractor& extractor);

struct ProbeResult {
  double cm_before = 0.0;
  double cm_after = 0.0;
  double delta = 0.0;  // after - before
};

struct EvaluationReport {
  std::vector<ProbeResult> probes;
  double mean_cm_before = 0.0;
  double mean_cm_after = 0.0;
  double mean_delta = 0.0;
};

// anchors[i] is compared against the before/after generations for
// probe_images[i]. A single anchor is shared by every probe.
EvaluationReport evaluate_unlearning(const ToyModel& before, const ToyModel& after,
                                     std::span<const FeatureBundle> anchors,
                                     std::span<const Tensor> probe_images,
                                     const refnet::RefExtractor& extractor,
                                     const metric::MetricConfig& cfg);

// {"steps": [{epoch, target_id, loss}], "pruned": [{target_id, layer, rows,
// zeroed}], "cm_before", "cm_after"}
std::string to_json(const UnlearnTrace& trace);

}  // namespace cpdm::unlearn

#endif  // CPDM_UNLEARNING_HPP_
