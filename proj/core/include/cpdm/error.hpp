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

#ifndef CPDM_ERROR_HPP_
#define CPDM_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace cpdm {

// Base class for every error raised by the library. The CLI maps any
// cpdm::Error to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or truncated bundle / CSV / JSON input.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Values that are well-formed but violate a domain invariant
// (NaN payloads, out-of-range pixels, zero variance, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Incompatible tensor shapes.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Stream or filesystem failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace cpdm

#endif  // CPDM_ERROR_HPP_
