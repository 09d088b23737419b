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

#include "cpdm/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cpdm/csv.hpp"
#include "cpdm/error.hpp"
#include "cpdm/format.hpp"
#include "cpdm/image_io.hpp"

namespace cpdm::analysis {
namespace {

constexpr const char* kRatingsHeader[] = {"sample_id", "category", "prompt_length",
                                          "metric_value", "human_rating"};

std::string group_json(const GroupCorrelation& g) {
  return "{\"group\": " + json_quote(g.group) + ", \"n\": " + std::to_string(g.n) +
         ", \"pearson\": " + fixed6(g.pearson) + ", \"spearman\": " + fixed6(g.spearman) + "}";
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ShapeError("correlation series differ in length");
  if (x.size() < 2) throw ValidationError("correlation needs at least 2 points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw ValidationError("correlation of a zero-variance series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    // positions i..j (0-based) share rank mean(i+1 .. j+1)
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ShapeError("correlation series differ in length");
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  return pearson(rx, ry);
}

std::string to_string(PromptLength p) {
  switch (p) {
    case PromptLength::kShort: return "short";
    case PromptLength::kMedium: return "medium";
    case PromptLength::kLong: return "long";
  }
  return "short";
}

PromptLength prompt_length_from_string(const std::string& s) {
  if (s == "short") return PromptLength::kShort;
  if (s == "medium") return PromptLength::kMedium;
  if (s == "long") return PromptLength::kLong;
  throw ValidationError("prompt_length must be short, medium or long, got '" + s + "'");
}

RatingsTable parse_ratings_csv(const std::string& text) {
  const auto rows = parse_csv(text);
  if (rows.empty()) throw FormatError("ratings CSV is empty");
  const auto& header = rows.front();
  if (header.size() != std::size(kRatingsHeader) ||
      !std::equal(header.begin(), header.end(), std::begin(kRatingsHeader))) {
    throw FormatError(
        "ratings CSV header must be sample_id,category,prompt_length,metric_value,human_rating");
  }
  RatingsTable t;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& cells = rows[r];
    const std::string where = "ratings CSV line " + std::to_string(r + 1);
    if (cells.size() != 5) throw FormatError(where + ": expected 5 cells");
    RatingRow row;
    row.sample_id = cells[0];
    row.category = cells[1];
    row.prompt_length = prompt_length_from_string(cells[2]);
    row.metric_value = parse_double(cells[3]);
    if (row.metric_value < 0.0 || row.metric_value > 100.0) {
      throw ValidationError(where + ": metric_value outside [0, 100]");
    }
    if (!cells[4].empty()) row.human_rating = parse_double(cells[4]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

RatingsTable load_ratings_csv(const std::filesystem::path& path) {
  return parse_ratings_csv(read_file(path));
}

std::string to_csv(const RatingsTable& table) {
  std::string out = "sample_id,category,prompt_length,metric_value,human_rating\n";
  for (const RatingRow& r : table.rows) {
    out += csv_field(r.sample_id) + "," + csv_field(r.category) + "," +
           to_string(r.prompt_length) + "," + significant(r.metric_value, 15) + ",";
    if (r.human_rating) out += significant(*r.human_rating, 15);
    out += "\n";
  }
  return out;
}

GroupBy group_by_from_string(const std::string& s) {
  if (s == "category") return GroupBy::kCategory;
  if (s == "prompt_length") return GroupBy::kPromptLength;
  throw ValidationError("group-by must be category or prompt_length, got '" + s + "'");
}

CorrelationReport correlate_ratings(const RatingsTable& table, GroupBy group_by) {
  struct Series {
    std::string name;
    std::vector<double> metric, rating;
  };
  std::vector<Series> groups;
  Series pooled{"pooled", {}, {}};
  for (const RatingRow& r : table.rows) {
    if (!r.human_rating) continue;
    const std::string key =
        group_by == GroupBy::kCategory ? r.category : to_string(r.prompt_length);
    auto it = std::find_if(groups.begin(), groups.end(), [&](const Series& s) { return s.name == key; });
    if (it == groups.end()) {
      groups.push_back(Series{key, {}, {}});
      it = groups.end() - 1;
    }
    it->metric.push_back(r.metric_value);
    it->rating.push_back(*r.human_rating);
    pooled.metric.push_back(r.metric_value);
    pooled.rating.push_back(*r.human_rating);
  }

  CorrelationReport report;
  auto evaluate = [&](const Series& s) -> std::optional<GroupCorrelation> {
    try {
      return GroupCorrelation{s.name, s.metric.size(), pearson(s.metric, s.rating),
                              spearman(s.metric, s.rating)};
    } catch (const Error& e) {
      report.warnings.push_back("group '" + s.name + "' skipped: " + e.what());
      return std::nullopt;
    }
  };
  for (const Series& s : groups) {
    if (auto g = evaluate(s)) report.groups.push_back(*g);
  }
  report.pooled = evaluate(pooled);
  return report;
}

std::string to_json(const CorrelationReport& report) {
  std::string out = "{\"groups\": [";
  for (std::size_t i = 0; i < report.groups.size(); ++i) {
    if (i > 0) out += ", ";
    out += group_json(report.groups[i]);
  }
  out += "], \"pooled\": " + (report.pooled ? group_json(*report.pooled) : std::string("null"));
  out += ", \"warnings\": [";
  for (std::size_t i = 0; i < report.warnings.size(); ++i) {
    if (i > 0) out += ", ";
    out += json_quote(report.warnings[i]);
  }
  return out + "]}";
}

std::string to_plain(const CorrelationReport& report) {
  std::string out = "group,n,pearson,spearman\n";
  auto line = [&](const GroupCorrelation& g) {
    out += csv_field(g.group) + "," + std::to_string(g.n) + "," + fixed6(g.pearson) + "," +
           fixed6(g.spearman) + "\n";
  };
  for (const auto& g : report.groups) line(g);
  if (report.pooled) line(*report.pooled);
  return out;
}

}  // namespace cpdm::analysis
