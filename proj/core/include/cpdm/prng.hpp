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

#ifndef CPDM_PRNG_HPP_
#define CPDM_PRNG_HPP_

#include <cstdint>

namespace cpdm {

// xorshift64* generator. All deterministic weights and synthetic fixtures
// in the project are drawn from this stream so that they are reproducible
// bit-for-bit from a seed in any language.
class Xorshift64Star {
 public:
  // xorshift has a fixed point at zero; a zero seed is replaced by this.
  static constexpr std::uint64_t kZeroSeedReplacement = 0x5EEDC0DEULL;

  explicit Xorshift64Star(std::uint64_t seed)
      : state_(seed == 0 ? kZeroSeedReplacement : seed) {}

  std::uint64_t next() {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 2685821657736338717ULL;
  }

  // Top 53 bits scaled into [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Network weight in [-0.1, 0.1], rounded to f32.
  float weight() { return static_cast<float>(uniform(-0.1, 0.1)); }

  // Standard normal via Box-Muller; consumes two draws.
  double normal();

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

}  // namespace cpdm

#endif  // CPDM_PRNG_HPP_
