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

#ifndef CPDM_CORRELATION_HPP_
#define CPDM_CORRELATION_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cpdm::analysis {

// Sample Pearson correlation in f64. Needs equal lengths >= 2 and nonzero
// variance in both series (ValidationError otherwise).
double pearson(std::span<const double> x, std::span<const double> y);

// Pearson of average ranks (ties share the mean of their positions, 1-based).
double spearman(std::span<const double> x, std::span<const double> y);
std::vector<double> average_ranks(std::span<const double> x);

enum class PromptLength { kShort, kMedium, kLong };
std::string to_string(PromptLength p);
PromptLength prompt_length_from_string(const std::string& s);

struct RatingRow {
  std::string sample_id;
  std::string category;
  PromptLength prompt_length = PromptLength::kShort;
  double metric_value = 0.0;                // percent, [0, 100]
  std::optional<double> human_rating;       // empty cell -> not rated
};

struct RatingsTable {
  std::vector<RatingRow> rows;
};

// Columns: sample_id, category, prompt_length, metric_value, human_rating.
RatingsTable parse_ratings_csv(const std::string& text);
RatingsTable load_ratings_csv(const std::filesystem::path& path);
std::string to_csv(const RatingsTable& table);

enum class GroupBy { kCategory, kPromptLength };
GroupBy group_by_from_string(const std::string& s);

struct GroupCorrelation {
  std::string group;
  std::size_t n = 0;
  double pearson = 0.0;
  double spearman = 0.0;
};

struct CorrelationReport {
  std::vector<GroupCorrelation> groups;    // first-appearance order
  std::optional<GroupCorrelation> pooled;  // all rated rows
  std::vector<std::string> warnings;       // skipped degenerate groups
};

// Correlates metric_value with human_rating per group and pooled. Rows
// without a rating are ignored; groups with < 2 rated rows or zero
// variance are skipped with a warning.
CorrelationReport correlate_ratings(const RatingsTable& table, GroupBy group_by);

std::string to_json(const CorrelationReport& report);
std::string to_plain(const CorrelationReport& report);

}  // namespace cpdm::analysis

#endif  // CPDM_CORRELATION_HPP_
