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

#include "cpdm/toy_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "json.hpp"

#include "cpdm/error.hpp"
#include "cpdm/format.hpp"
#include "cpdm/prng.hpp"

namespace cpdm::refnet {

std::string to_string(Activation a) { return a == Activation::kRelu ? "relu" : "identity"; }

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "identity") return Activation::kIdentity;
  throw FormatError("unknown activation '" + s + "'");
}

void ToyModel::validate() const {
  if (layers.empty()) throw ShapeError("toy model has no layers");
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const DenseLayer& l = layers[k];
    if (l.weights.rank() != 2) throw ShapeError("layer " + std::to_string(k) + " weights not rank-2");
    if (l.bias.rank() != 1 || l.bias.size() != l.rows()) {
      throw ShapeError("layer " + std::to_string(k) + " bias must have " +
                       std::to_string(l.rows()) + " entries");
    }
    if (k > 0 && l.cols() != layers[k - 1].rows()) {
      throw ShapeError("layer " + std::to_string(k) + " expects " + std::to_string(l.cols()) +
                       " inputs but layer " + std::to_string(k - 1) + " produces " +
                       std::to_string(layers[k - 1].rows()));
    }
  }
}

std::size_t ToyModel::parameter_count() const {
  std::size_t n = 0;
  for (const DenseLayer& l : layers) n += l.weights.size() + l.bias.size();
  return n;
}

ToyModel make_toy_model(std::uint64_t seed, std::span<const std::size_t> sizes,
                        std::span<const Activation> activations) {
  if (sizes.size() < 2 || activations.size() != sizes.size() - 1) {
    throw ShapeError("layer plan needs n+1 sizes for n activations");
  }
  Xorshift64Star rng(seed);
  ToyModel m;
  for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
    DenseLayer layer{Tensor({sizes[k + 1], sizes[k]}), Tensor({sizes[k + 1]}), activations[k]};
    for (float& w : layer.weights.values()) w = rng.weight();
    m.layers.push_back(std::move(layer));
  }
  return m;
}

ToyModel default_toy_model(std::uint64_t seed) {
  static constexpr std::size_t kSizes[] = {8, 16, 16, 4};
  static constexpr Activation kActs[] = {Activation::kRelu, Activation::kRelu,
                                         Activation::kIdentity};
  return make_toy_model(seed, kSizes, kActs);
}

namespace {

// f64 copy of every parameter, so finite differences are not limited by
// f32 rounding of the perturbed value.
struct DoubleParams {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;

  explicit DoubleParams(const ToyModel& m) {
    for (const DenseLayer& l : m.layers) {
      weights.emplace_back(l.weights.values().begin(), l.weights.values().end());
      biases.emplace_back(l.bias.values().begin(), l.bias.values().end());
    }
  }
};

template <typename Params>
ForwardRecord forward_impl(const ToyModel& m, const Params& p, std::vector<double> x) {
  ForwardRecord rec;
  for (std::size_t k = 0; k < m.layers.size(); ++k) {
    const DenseLayer& l = m.layers[k];
    const std::size_t rows = l.rows();
    const std::size_t cols = l.cols();
    std::vector<double> y(rows);
    for (std::size_t i = 0; i < rows; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < cols; ++j) acc += p.weight(k, i * cols + j) * x[j];
      y[i] = acc + p.bias(k, i);
    }
    std::vector<double> next = y;
    if (l.activation == Activation::kRelu) {
      for (double& v : next) v = v > 0.0 ? v : 0.0;
    }
    rec.inputs.push_back(std::move(x));
    rec.pre_activations.push_back(std::move(y));
    x = std::move(next);
  }
  rec.output = std::move(x);
  return rec;
}

struct FloatView {
  const ToyModel& m;
  double weight(std::size_t k, std::size_t i) const { return m.layers[k].weights[i]; }
  double bias(std::size_t k, std::size_t i) const { return m.layers[k].bias[i]; }
};

struct DoubleView {
  const DoubleParams& p;
  double weight(std::size_t k, std::size_t i) const { return p.weights[k][i]; }
  double bias(std::size_t k, std::size_t i) const { return p.biases[k][i]; }
};

void check_input(const ToyModel& m, std::size_t n) {
  m.validate();
  if (n != m.input_size()) {
    throw ShapeError("toy model expects " + std::to_string(m.input_size()) + " inputs, got " +
                     std::to_string(n));
  }
}

}  // namespace

ForwardRecord toy_forward(const ToyModel& model, std::span<const float> x) {
  check_input(model, x.size());
  return forward_impl(model, FloatView{model}, std::vector<double>(x.begin(), x.end()));
}

double mse_loss(std::span<const double> output, std::span<const float> target) {
  if (output.size() != target.size()) {
    throw ShapeError("target has " + std::to_string(target.size()) + " entries, output has " +
                     std::to_string(output.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < output.size(); ++i) {
    const double d = output[i] - static_cast<double>(target[i]);
    acc += d * d;
  }
  return acc / static_cast<double>(output.size());
}

GradientRecord toy_backward(const ToyModel& model, const ForwardRecord& record,
                            std::span<const float> target) {
  model.validate();
  if (record.pre_activations.size() != model.layers.size() ||
      record.inputs.size() != model.layers.size()) {
    throw ShapeError("forward record does not match model depth");
  }
  GradientRecord g;
  g.loss = mse_loss(record.output, target);
  g.weight_grads.resize(model.layers.size());
  g.bias_grads.resize(model.layers.size());

  const double n = static_cast<double>(record.output.size());
  std::vector<double> upstream(record.output.size());
  for (std::size_t i = 0; i < upstream.size(); ++i) {
    upstream[i] = 2.0 * (record.output[i] - static_cast<double>(target[i])) / n;
  }

  for (std::size_t k = model.layers.size(); k-- > 0;) {
    const DenseLayer& l = model.layers[k];
    const std::size_t rows = l.rows();
    const std::size_t cols = l.cols();
    const auto& y = record.pre_activations[k];
    const auto& x = record.inputs[k];
    if (y.size() != rows || x.size() != cols) throw ShapeError("forward record shape mismatch");

    std::vector<double> dy = upstream;
    if (l.activation == Activation::kRelu) {
      for (std::size_t i = 0; i < rows; ++i) {
        if (!(y[i] > 0.0)) dy[i] = 0.0;
      }
    }
    auto& gw = g.weight_grads[k];
    gw.assign(rows * cols, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) gw[i * cols + j] = dy[i] * x[j];
    }
    g.bias_grads[k] = dy;

    std::vector<double> dx(cols, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) dx[j] += static_cast<double>(l.weights.at(i, j)) * dy[i];
    }
    upstream = std::move(dx);
  }
  return g;
}

double grad_check(const ToyModel& model, const Tensor& x, const Tensor& target, double h) {
  if (!(h > 0.0)) throw ValidationError("finite-difference step must be positive");
  const ForwardRecord rec = toy_forward(model, x);
  const GradientRecord g = toy_backward(model, rec, target);

  DoubleParams params(model);
  const std::vector<double> x64(x.values().begin(), x.values().end());
  auto loss = [&] {
    return mse_loss(forward_impl(model, DoubleView{params}, x64).output, target.values());
  };
  auto central = [&](double& p) {
    const double saved = p;
    p = saved + h;
    const double up = loss();
    p = saved - h;
    const double down = loss();
    p = saved;
    return (up - down) / (2.0 * h);
  };
  auto rel = [](double analytic, double numeric) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    return std::abs(analytic - numeric) / denom;
  };

  double worst = 0.0;
  for (std::size_t k = 0; k < model.layers.size(); ++k) {
    for (std::size_t i = 0; i < params.weights[k].size(); ++i) {
      worst = std::max(worst, rel(g.weight_grads[k][i], central(params.weights[k][i])));
    }
    for (std::size_t i = 0; i < params.biases[k].size(); ++i) {
      worst = std::max(worst, rel(g.bias_grads[k][i], central(params.biases[k][i])));
    }
  }
  return worst;
}

double relu_margin(const ToyModel& model, const ForwardRecord& record) {
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < model.layers.size(); ++k) {
    if (model.layers[k].activation != Activation::kRelu) continue;
    for (double y : record.pre_activations.at(k)) margin = std::min(margin, std::abs(y));
  }
  return margin;
}

namespace {

double round9(float v) { return parse_double(significant(v, 9)); }

std::vector<float> read_floats(const nlohmann::json& arr, const char* what) {
  if (!arr.is_array()) throw FormatError(std::string(what) + " must be an array");
  std::vector<float> out;
  out.reserve(arr.size());
  for (const auto& v : arr) {
    if (!v.is_number()) throw FormatError(std::string(what) + " must contain numbers");
    out.push_back(static_cast<float>(v.get<double>()));
  }
  return out;
}

}  // namespace

std::string to_json(const ToyModel& model) {
  model.validate();
  nlohmann::ordered_json doc;
  doc["layers"] = nlohmann::ordered_json::array();
  for (const DenseLayer& l : model.layers) {
    nlohmann::ordered_json layer;
    layer["rows"] = l.rows();
    layer["cols"] = l.cols();
    layer["activation"] = to_string(l.activation);
    auto& w = layer["weights"] = nlohmann::ordered_json::array();
    for (float v : l.weights.values()) w.push_back(round9(v));
    auto& b = layer["bias"] = nlohmann::ordered_json::array();
    for (float v : l.bias.values()) b.push_back(round9(v));
    doc["layers"].push_back(std::move(layer));
  }
  return doc.dump(2) + "\n";
}

ToyModel toy_model_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("toy model JSON: ") + e.what());
  }
  if (!doc.contains("layers") || !doc["layers"].is_array()) {
    throw FormatError("toy model JSON needs a 'layers' array");
  }
  ToyModel m;
  try {
    for (const auto& l : doc["layers"]) {
      const auto rows = l.at("rows").get<std::size_t>();
      const auto cols = l.at("cols").get<std::size_t>();
      m.layers.push_back(DenseLayer{Tensor({rows, cols}, read_floats(l.at("weights"), "weights")),
                                    Tensor({rows}, read_floats(l.at("bias"), "bias")),
                                    activation_from_string(l.at("activation").get<std::string>())});
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("toy model JSON: ") + e.what());
  }
  m.validate();
  return m;
}

}  // namespace cpdm::refnet
