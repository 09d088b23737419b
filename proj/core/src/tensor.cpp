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

#include "cpdm/tensor.hpp"

#include <cassert>
#include <cmath>
#include <utility>

#include "cpdm/error.hpp"

namespace cpdm {

std::size_t shape_product(std::span<const std::size_t> shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_string(std::span<const std::size_t> shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

namespace {

void check_shape(const std::vector<std::size_t>& shape) {
  if (shape.empty()) throw ShapeError("tensor shape must have at least one axis");
  for (std::size_t d : shape) {
    if (d == 0) throw ShapeError("tensor shape " + shape_string(shape) + " has a zero dimension");
  }
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
  check_shape(shape_);
  data_.assign(shape_product(shape_), 0.0f);
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<float> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  check_shape(shape_);
  if (data_.size() != shape_product(shape_)) {
    throw ShapeError("tensor shape " + shape_string(shape_) + " needs " +
                     std::to_string(shape_product(shape_)) + " elements, got " +
                     std::to_string(data_.size()));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw ValidationError("tensor element " + std::to_string(i) + " is not finite");
    }
  }
}

Tensor Tensor::vector(std::vector<float> data) {
  std::size_t n = data.size();
  return Tensor({n}, std::move(data));
}

float Tensor::at(std::size_t i, std::size_t j) const {
  assert(rank() == 2);
  return data_[i * shape_[1] + j];
}

float& Tensor::at(std::size_t i, std::size_t j) {
  assert(rank() == 2);
  return data_[i * shape_[1] + j];
}

float Tensor::at(std::size_t c, std::size_t h, std::size_t w) const {
  assert(rank() == 3);
  return data_[(c * shape_[1] + h) * shape_[2] + w];
}

float& Tensor::at(std::size_t c, std::size_t h, std::size_t w) {
  assert(rank() == 3);
  return data_[(c * shape_[1] + h) * shape_[2] + w];
}

}  // namespace cpdm
