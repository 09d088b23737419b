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

#ifndef CPDM_TENSOR_HPP_
#define CPDM_TENSOR_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace cpdm {

// Dense row-major f32 array with an explicit shape.
//
// Every dimension is >= 1 and every element is finite after construction.
// Mutable element access is provided for algorithms that update weights in
// place; those callers are responsible for keeping values finite.
class Tensor {
 public:
  Tensor() = default;

  // Zero-filled tensor. Throws ShapeError on an empty shape or a zero dim.
  explicit Tensor(std::vector<std::size_t> shape);

  // Throws ShapeError if data.size() != product(shape), ValidationError if
  // any element is NaN or infinite.
  Tensor(std::vector<std::size_t> shape, std::vector<float> data);

  static Tensor vector(std::vector<float> data);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<const float> values() const { return data_; }
  std::span<float> values() { return data_; }

  float operator[](std::size_t i) const { return data_[i]; }
  float& operator[](std::size_t i) { return data_[i]; }

  // Row-major multi-index access; no bounds checking beyond debug asserts.
  float at(std::size_t i, std::size_t j) const;
  float& at(std::size_t i, std::size_t j);
  float at(std::size_t c, std::size_t h, std::size_t w) const;
  float& at(std::size_t c, std::size_t h, std::size_t w);

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<float> data_;
};

std::size_t shape_product(std::span<const std::size_t> shape);

// "[3, 16, 16]"
std::string shape_string(std::span<const std::size_t> shape);

}  // namespace cpdm

#endif  // CPDM_TENSOR_HPP_
