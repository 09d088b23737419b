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

#ifndef CPDM_FORMAT_HPP_
#define CPDM_FORMAT_HPP_

#include <string>
#include <string_view>

namespace cpdm {

// Locale-independent fixed-point text, e.g. fixed(0.5, 6) == "0.500000".
// Values that round to zero print without a sign.
std::string fixed(double value, int decimals);
inline std::string fixed6(double value) { return fixed(value, 6); }

// Shortest text with at most `digits` significant digits ("%.9g" style).
std::string significant(double value, int digits);

// Strict decimal parse of the whole string; throws FormatError.
double parse_double(std::string_view text);

// JSON string literal with escaping, including the surrounding quotes.
std::string json_quote(const std::string& s);

}  // namespace cpdm

#endif  // CPDM_FORMAT_HPP_
