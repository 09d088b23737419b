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

#include "cpdm/unlearning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cpdm/error.hpp"
#include "cpdm/format.hpp"

namespace cpdm::unlearn {

void GAConfig::validate() const {
  if (!std::isfinite(eta) || eta < 0.0) throw ValidationError("GA learning rate must be >= 0");
  if (epochs < 1) throw ValidationError("GA needs at least one epoch");
}

void PruneSpec::validate() const {
  auto ok = [](double p) { return std::isfinite(p) && p > 0.0 && p <= 1.0; };
  if (!ok(p_c) || !ok(p_w)) throw ValidationError("pruning ratios must lie in (0, 1]");
}

std::size_t rounded_count(double fraction, std::size_t n) {
  // The epsilon keeps products like 0.29 * 100 = 28.999... from losing one.
  const auto k = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
  return std::min(n, std::max<std::size_t>(1, k));
}

namespace {

void check_target(const ToyModel& m, const TargetPair& t) {
  m.validate();
  if (t.x.size() != m.input_size() || t.y.size() != m.output_size()) {
    throw ShapeError("target pair sizes " + std::to_string(t.x.size()) + "/" +
                     std::to_string(t.y.size()) + " do not match model " +
                     std::to_string(m.input_size()) + "/" + std::to_string(m.output_size()));
  }
}

}  // namespace

GaStepResult ga_step(ToyModel model, const TargetPair& target, double eta) {
  check_target(model, target);
  if (!std::isfinite(eta) || eta < 0.0) throw ValidationError("GA learning rate must be >= 0");
  const auto rec = refnet::toy_forward(model, target.x);
  const auto g = refnet::toy_backward(model, rec, target.y);
  for (std::size_t k = 0; k < model.layers.size(); ++k) {
    auto w = model.layers[k].weights.values();
    for (std::size_t i = 0; i < w.size(); ++i) {
      w[i] = static_cast<float>(static_cast<double>(w[i]) + eta * g.weight_grads[k][i]);
    }
    auto b = model.layers[k].bias.values();
    for (std::size_t i = 0; i < b.size(); ++i) {
      b[i] = static_cast<float>(static_cast<double>(b[i]) + eta * g.bias_grads[k][i]);
    }
  }
  return GaStepResult{std::move(model), g.loss};
}

UnlearnTrace ga_run(const ToyModel& model, std::span<const TargetPair> targets, const GAConfig& cfg) {
  cfg.validate();
  if (targets.empty()) throw ValidationError("GA needs at least one target");
  for (const TargetPair& t : targets) check_target(model, t);
  UnlearnTrace trace;
  trace.original = model;
  ToyModel current = model;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t t = 0; t < targets.size(); ++t) {
      GaStepResult r = ga_step(std::move(current), targets[t], cfg.eta);
      current = std::move(r.model);
      trace.steps.push_back(StepRecord{epoch, t, r.loss});
    }
  }
  trace.unlearned = std::move(current);
  return trace;
}

std::vector<std::vector<std::size_t>> wp_select(const refnet::ForwardRecord& record, double p_c) {
  std::vector<std::vector<std::size_t>> selected;
  for (const auto& y : record.pre_activations) {
    std::vector<std::size_t> order(y.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(y[a]) > std::abs(y[b]); });
    order.resize(rounded_count(p_c, y.size()));
    selected.push_back(std::move(order));
  }
  return selected;
}

WpPruneResult wp_prune(ToyModel model, const refnet::GradientRecord& grads,
                       std::span<const std::vector<std::size_t>> selected, double p_w) {
  model.validate();
  if (selected.size() > model.layers.size()) {
    throw ValidationError("selection lists more layers than the model has");
  }
  if (grads.weight_grads.size() != model.layers.size()) {
    throw ShapeError("gradient record does not match model depth");
  }
  WpPruneResult result;
  for (std::size_t k = 0; k < model.layers.size(); ++k) {
    PrunedLayer info;
    info.layer = k;
    if (k < selected.size()) {
      refnet::DenseLayer& layer = model.layers[k];
      const std::size_t cols = layer.cols();
      const auto& g = grads.weight_grads[k];
      if (g.size() != layer.weights.size()) throw ShapeError("gradient shape mismatch");
      const std::size_t k_cols = rounded_count(p_w, cols);
      for (std::size_t row : selected[k]) {
        if (row >= layer.rows()) {
          throw ValidationError("selected row " + std::to_string(row) + " out of range for layer " +
                                std::to_string(k));
        }
        if (std::find(info.rows.begin(), info.rows.end(), row) != info.rows.end()) continue;
        info.rows.push_back(row);
        std::vector<std::size_t> order(cols);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
          return std::abs(g[row * cols + a]) > std::abs(g[row * cols + b]);
        });
        for (std::size_t c = 0; c < k_cols; ++c) {
          layer.weights.at(row, order[c]) = 0.0f;
          info.zeroed.emplace_back(row, order[c]);
        }
      }
    }
    result.layers.push_back(std::move(info));
  }
  result.model = std::move(model);
  return result;
}

UnlearnTrace wp_run(const ToyModel& model, std::span<const TargetPair> targets, const PruneSpec& spec) {
  spec.validate();
  if (targets.empty()) throw ValidationError("WP needs at least one target");
  UnlearnTrace trace;
  trace.original = model;
  ToyModel current = model;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    check_target(current, targets[t]);
    const auto rec = refnet::toy_forward(current, targets[t].x);
    const auto g = refnet::toy_backward(current, rec, targets[t].y);
    const auto selected = wp_select(rec, spec.p_c);
    WpPruneResult r = wp_prune(std::move(current), g, selected, spec.p_w);
    current = std::move(r.model);
    trace.steps.push_back(StepRecord{0, t, g.loss});
    for (PrunedLayer& p : r.layers) {
      p.target_id = t;
      trace.pruned.push_back(std::move(p));
    }
  }
  trace.unlearned = std::move(current);
  return trace;
}

Tensor probe_prompt(const Tensor& image, std::size_t n) {
  if (image.rank() != 3 || n == 0 || image.dim(1) < n) {
    throw ShapeError("probe image " + shape_string(image.shape()) + " cannot yield " +
                     std::to_string(n) + " prompt entries");
  }
  const std::size_t channels = image.dim(0);
  const std::size_t h = image.dim(1);
  const std::size_t w = image.dim(2);
  std::vector<float> x(n);
  for (std::size_t b = 0; b < n; ++b) {
    const std::size_t y0 = b * h / n;
    const std::size_t y1 = (b + 1) * h / n;
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      for (std::size_t y = y0; y < y1; ++y) {
        for (std::size_t xx = 0; xx < w; ++xx) acc += image.at(c, y, xx);
      }
    }
    const double mean = acc / static_cast<double>(channels * (y1 - y0) * w);
    x[b] = static_cast<float>(2.0 * mean - 1.0);
  }
  return Tensor::vector(std::move(x));
}

Tensor render_generation(std::span<const double> output, const Tensor& image) {
  if (image.rank() != 3 || output.empty()) throw ShapeError("render needs [C, H, W] and output");
  Tensor out = image;
  const std::size_t n = output.size();
  for (std::size_t c = 0; c < image.dim(0); ++c) {
    for (std::size_t y = 0; y < image.dim(1); ++y) {
      for (std::size_t x = 0; x < image.dim(2); ++x) {
        const double v = image.at(c, y, x) + 0.25 * std::tanh(output[(c + y + x) % n]);
        out.at(c, y, x) = static_cast<float>(std::clamp(v, 0.0, 1.0));
      }
    }
  }
  return out;
}

FeatureBundle generate_features(const ToyModel& model, const Tensor& probe_image,
                                const refnet::RefExtractor& extractor) {
  const Tensor prompt = probe_prompt(probe_image, model.input_size());
  const auto rec = refnet::toy_forward(model, prompt);
  return refnet::forward_features(render_generation(rec.output, probe_image), extractor);
}

EvaluationReport evaluate_unlearning(const ToyModel& before, const ToyModel& after,
                                     std::span<const FeatureBundle> anchors,
                                     std::span<const Tensor> probe_images,
                                     const refnet::RefExtractor& extractor,
                                     const metric::MetricConfig& cfg) {
  if (probe_images.empty()) throw ValidationError("evaluation needs at least one probe image");
  if (anchors.empty() || (anchors.size() != 1 && anchors.size() != probe_images.size())) {
    throw ValidationError("need one anchor, or one anchor per probe image");
  }
  EvaluationReport report;
  for (std::size_t i = 0; i < probe_images.size(); ++i) {
    const FeatureBundle& anchor = anchors.size() == 1 ? anchors[0] : anchors[i];
    const FeatureBundle gen_before = generate_features(before, probe_images[i], extractor);
    const FeatureBundle gen_after = generate_features(after, probe_images[i], extractor);
    ProbeResult r;
    r.cm_before = metric::cpdm_metric(anchor, gen_before, cfg).cm;
    r.cm_after = metric::cpdm_metric(anchor, gen_after, cfg).cm;
    r.delta = r.cm_after - r.cm_before;
    report.mean_cm_before += r.cm_before;
    report.mean_cm_after += r.cm_after;
    report.mean_delta += r.delta;
    report.probes.push_back(r);
  }
  const double n = static_cast<double>(report.probes.size());
  report.mean_cm_before /= n;
  report.mean_cm_after /= n;
  report.mean_delta /= n;
  return report;
}

std::string to_json(const UnlearnTrace& trace) {
  std::string out = "{\n  \"steps\": [";
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const StepRecord& s = trace.steps[i];
    out += (i > 0 ? ",\n    " : "\n    ");
    out += "{\"epoch\": " + std::to_string(s.epoch) + ", \"target_id\": " +
           std::to_string(s.target_id) + ", \"loss\": " + significant(s.loss, 17) + "}";
  }
  out += trace.steps.empty() ? "],\n" : "\n  ],\n";
  out += "  \"pruned\": [";
  for (std::size_t i = 0; i < trace.pruned.size(); ++i) {
    const PrunedLayer& p = trace.pruned[i];
    out += (i > 0 ? ",\n    " : "\n    ");
    out += "{\"target_id\": " + std::to_string(p.target_id) + ", \"layer\": " +
           std::to_string(p.layer) + ", \"rows\": [";
    for (std::size_t r = 0; r < p.rows.size(); ++r) {
      out += (r > 0 ? ", " : "") + std::to_string(p.rows[r]);
    }
    out += "], \"zeroed\": [";
    for (std::size_t z = 0; z < p.zeroed.size(); ++z) {
      out += (z > 0 ? ", [" : "[") + std::to_string(p.zeroed[z].first) + ", " +
             std::to_string(p.zeroed[z].second) + "]";
    }
    out += "]}";
  }
  out += trace.pruned.empty() ? "],\n" : "\n  ],\n";
  out += "  \"cm_before\": " + (trace.cm_before ? fixed6(*trace.cm_before) : std::string("null")) +
         ",\n  \"cm_after\": " + (trace.cm_after ? fixed6(*trace.cm_after) : std::string("null")) +
         "\n}\n";
  return out;
}

}  // namespace cpdm::unlearn
