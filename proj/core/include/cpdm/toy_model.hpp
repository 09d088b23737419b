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

#ifndef CPDM_TOY_MODEL_HPP_
#define CPDM_TOY_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cpdm/tensor.hpp"

namespace cpdm::refnet {

enum class Activation { kIdentity, kRelu };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

// y = activation(W x + b), W is [rows (out), cols (in)].
struct DenseLayer {
  Tensor weights;
  Tensor bias;
  Activation activation = Activation::kIdentity;

  std::size_t rows() const { return weights.dim(0); }
  std::size_t cols() const { return weights.dim(1); }

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

// Small dense network used as the unlearning substrate. Parameters are f32;
// forward, backward and finite differences run in f64.
struct ToyModel {
  std::vector<DenseLayer> layers;

  // Throws ShapeError unless layers chain (cols of k+1 == rows of k) and
  // every bias has `rows` entries.
  void validate() const;

  std::size_t input_size() const { return layers.front().cols(); }
  std::size_t output_size() const { return layers.back().rows(); }
  std::size_t parameter_count() const;

  friend bool operator==(const ToyModel&, const ToyModel&) = default;
};

// sizes = {in, h1, ..., out}; activations has sizes.size() - 1 entries.
// Weights are drawn from xorshift64* in [-0.1, 0.1], layer by layer in
// row-major order; biases are zero.
ToyModel make_toy_model(std::uint64_t seed, std::span<const std::size_t> sizes,
                        std::span<const Activation> activations);

// 8 -> 16 -> 16 -> 4 with relu, relu, identity.
ToyModel default_toy_model(std::uint64_t seed);

struct ForwardRecord {
  std::vector<std::vector<double>> inputs;          // per layer
  std::vector<std::vector<double>> pre_activations; // Y = W x + b, per layer
  std::vector<double> output;
};

struct GradientRecord {
  std::vector<std::vector<double>> weight_grads;  // row-major, same shape as W
  std::vector<std::vector<double>> bias_grads;
  double loss = 0.0;  // mean squared error over output entries
};

ForwardRecord toy_forward(const ToyModel& model, std::span<const float> x);
inline ForwardRecord toy_forward(const ToyModel& model, const Tensor& x) {
  return toy_forward(model, x.values());
}

double mse_loss(std::span<const double> output, std::span<const float> target);

// Exact reverse-mode gradients of the MSE loss.
GradientRecord toy_backward(const ToyModel& model, const ForwardRecord& record,
                            std::span<const float> target);
inline GradientRecord toy_backward(const ToyModel& model, const ForwardRecord& record,
                                   const Tensor& target) {
  return toy_backward(model, record, target.values());
}

// max over parameters of |analytic - central difference| /
// max(|analytic|, |central difference|, 1e-8). Requires h > 0.
double grad_check(const ToyModel& model, const Tensor& x, const Tensor& target, double h);

// Smallest |pre-activation| over relu layers, +inf if there are none. A
// finite-difference check with step h is kink-free when this exceeds ~10h.
double relu_margin(const ToyModel& model, const ForwardRecord& record);

// {"layers": [{"rows", "cols", "activation", "weights", "bias"}]}, numbers
// printed with 9 significant digits (exact for f32).
std::string to_json(const ToyModel& model);
ToyModel toy_model_from_json(const std::string& text);

}  // namespace cpdm::refnet

#endif  // CPDM_TOY_MODEL_HPP_
