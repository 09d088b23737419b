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

#ifndef CPDM_CSV_HPP_
#define CPDM_CSV_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace cpdm {

// Minimal RFC 4180 reader/writer: comma separated, double-quote escaping,
// LF or CRLF line ends. Blank lines are skipped.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);
std::string csv_field(std::string_view value);

}  // namespace cpdm

#endif  // CPDM_CSV_HPP_
