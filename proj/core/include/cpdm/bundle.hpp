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

#ifndef CPDM_BUNDLE_HPP_
#define CPDM_BUNDLE_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cpdm/tensor.hpp"

namespace cpdm {

// On-disk layout (little-endian throughout):
//
//   magic        8 bytes  "CPDMBNDL"
//   version      u16      1
//   entry_count  u32
//   entries:
//     name_len u16, name (UTF-8), dtype u8 (1 = f32), ndim u8,
//     dims ndim x u32, payload product(dims) x f32
//
// Files use the ".cpdm" extension.
inline constexpr std::string_view kBundleMagic = "CPDMBNDL";
inline constexpr std::uint16_t kBundleVersion = 1;
inline constexpr std::uint8_t kDtypeF32 = 1;
inline constexpr std::string_view kBundleExtension = ".cpdm";

inline constexpr std::string_view kEmbeddingEntry = "embedding";
inline constexpr std::string_view kTextEmbeddingEntry = "text_embedding";
inline constexpr std::array<std::string_view, 4> kStageEntries = {"stage1", "stage2", "stage3",
                                                                  "stage4"};
// Text metadata rides in the entry name of a 1-element placeholder tensor,
// e.g. "meta:image_id=starry_night". Readers that do not know the prefix
// treat these as ordinary unknown entries.
inline constexpr std::string_view kImageIdPrefix = "meta:image_id=";
inline constexpr std::string_view kExtractorTagPrefix = "meta:extractor_tag=";

struct Entry {
  std::string name;
  Tensor tensor;

  friend bool operator==(const Entry&, const Entry&) = default;
};

// Raw container access: any list of named tensors. Used directly for
// non-bundle payloads such as FID statistics files.
std::uint64_t write_entries(const std::vector<Entry>& entries, std::ostream& out);
std::vector<Entry> read_entries(std::istream& in);

struct FeatureBundle {
  std::string image_id;
  Tensor embedding;                     // rank-1
  std::array<Tensor, 4> stages;         // rank-3 [channels, height, width]
  std::optional<Tensor> text_embedding; // rank-1, independent length
  std::string extractor_tag;
  std::vector<Entry> extra;             // unknown entries, kept in file order

  // Throws ValidationError describing the first broken invariant.
  void validate() const;

  friend bool operator==(const FeatureBundle&, const FeatureBundle&) = default;
};

// Returns the number of bytes written. Output is a pure function of the
// bundle; IoError carries the byte offset of the failed write.
std::uint64_t write_bundle(const FeatureBundle& bundle, std::ostream& out);
FeatureBundle read_bundle(std::istream& in);

void save_bundle(const FeatureBundle& bundle, const std::filesystem::path& path);
FeatureBundle load_bundle(const std::filesystem::path& path);

// All *.cpdm files directly inside dir, sorted lexicographically by filename.
std::vector<std::filesystem::path> list_bundles(const std::filesystem::path& dir);

struct Mismatch {
  std::string where;  // "embedding", "stage1".."stage4"
  std::string detail;
};

struct PairReport {
  std::vector<Mismatch> mismatches;

  bool ok() const { return mismatches.empty(); }
  std::string to_string() const;
};

// Embedding lengths and per-stage channel counts must agree; spatial sizes
// may differ since Gram matrices are channel x channel.
PairReport validate_pair(const FeatureBundle& a, const FeatureBundle& b);

}  // namespace cpdm

#endif  // CPDM_BUNDLE_HPP_
