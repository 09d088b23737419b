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

#include "cpdm/bundle.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <limits>
#include <utility>

#include "cpdm/error.hpp"

namespace cpdm {
namespace {

class ByteWriter {
 public:
  explicit ByteWriter(std::ostream& out) : out_(out) {}

  void bytes(const void* data, std::size_t n) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    if (!out_) {
      throw IoError("write failed at byte offset " + std::to_string(written_));
    }
    written_ += n;
  }

  template <typename T>
  void le(T value) {
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      buf[i] = static_cast<unsigned char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF);
    }
    bytes(buf, sizeof(T));
  }

  void f32(float v) { le(std::bit_cast<std::uint32_t>(v)); }

  std::uint64_t written() const { return written_; }

 private:
  std::ostream& out_;
  std::uint64_t written_ = 0;
};

class ByteReader {
 public:
  explicit ByteReader(std::vector<unsigned char> buf) : buf_(std::move(buf)) {}

  std::size_t remaining() const { return buf_.size() - pos_; }
  std::size_t position() const { return pos_; }

  // `what` names the field for truncation diagnostics.
  void need(std::size_t n, const std::string& what) const {
    if (remaining() < n) {
      throw FormatError("truncated " + what + ": expected " + std::to_string(n) +
                        " bytes at offset " + std::to_string(pos_) + ", got " +
                        std::to_string(remaining()));
    }
  }

  template <typename T>
  T le(const std::string& what) {
    need(sizeof(T), what);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<std::uint64_t>(buf_[pos_ + i]) << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }

  std::string str(std::size_t n, const std::string& what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(buf_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  float f32() {
    std::uint32_t bits = 0;
    for (std::size_t i = 0; i < 4; ++i) {
      bits |= static_cast<std::uint32_t>(buf_[pos_ + i]) << (8 * i);
    }
    pos_ += 4;
    return std::bit_cast<float>(bits);
  }

 private:
  std::vector<unsigned char> buf_;
  std::size_t pos_ = 0;
};

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

Entry meta_entry(std::string_view prefix, const std::string& value) {
  return Entry{std::string(prefix) + value, Tensor({1})};
}

void check_rank(const Tensor& t, std::size_t rank, std::string_view name) {
  if (t.rank() != rank) {
    throw ValidationError("entry '" + std::string(name) + "' must be rank-" +
                          std::to_string(rank) + ", got shape " + shape_string(t.shape()));
  }
}

}  // namespace

std::uint64_t write_entries(const std::vector<Entry>& entries, std::ostream& out) {
  ByteWriter w(out);
  w.bytes(kBundleMagic.data(), kBundleMagic.size());
  w.le<std::uint16_t>(kBundleVersion);
  w.le<std::uint32_t>(static_cast<std::uint32_t>(entries.size()));
  for (const Entry& e : entries) {
    if (e.name.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw ValidationError("entry name longer than 65535 bytes");
    }
    if (e.tensor.rank() == 0 || e.tensor.rank() > 255) {
      throw ValidationError("entry '" + e.name + "' has unsupported rank " +
                            std::to_string(e.tensor.rank()));
    }
    w.le<std::uint16_t>(static_cast<std::uint16_t>(e.name.size()));
    w.bytes(e.name.data(), e.name.size());
    w.le<std::uint8_t>(kDtypeF32);
    w.le<std::uint8_t>(static_cast<std::uint8_t>(e.tensor.rank()));
    for (std::size_t d : e.tensor.shape()) {
      if (d > std::numeric_limits<std::uint32_t>::max()) {
        throw ValidationError("entry '" + e.name + "' dimension exceeds u32");
      }
      w.le<std::uint32_t>(static_cast<std::uint32_t>(d));
    }
    for (float v : e.tensor.values()) w.f32(v);
  }
  out.flush();
  if (!out) throw IoError("flush failed after " + std::to_string(w.written()) + " bytes");
  return w.written();
}

std::vector<Entry> read_entries(std::istream& in) {
  std::vector<unsigned char> buf{std::istreambuf_iterator<char>(in),
                                 std::istreambuf_iterator<char>()};
  if (in.bad()) throw IoError("read failed");
  ByteReader r(std::move(buf));

  if (r.remaining() < kBundleMagic.size() ||
      r.str(kBundleMagic.size(), "magic") != kBundleMagic) {
    throw FormatError("bad magic: not a CPDM bundle");
  }
  auto version = r.le<std::uint16_t>("version");
  if (version != kBundleVersion) {
    throw FormatError("unsupported bundle version " + std::to_string(version));
  }
  auto count = r.le<std::uint32_t>("entry count");

  std::vector<Entry> entries;
  for (std::uint32_t k = 0; k < count; ++k) {
    std::string label = "entry #" + std::to_string(k);
    auto name_len = r.le<std::uint16_t>(label + " name length");
    std::string name = r.str(name_len, label + " name");
    label = "entry '" + name + "'";
    auto dtype = r.le<std::uint8_t>(label + " dtype");
    if (dtype != kDtypeF32) {
      throw FormatError(label + " has unsupported dtype code " + std::to_string(dtype));
    }
    auto ndim = r.le<std::uint8_t>(label + " ndim");
    if (ndim == 0) throw FormatError(label + " has ndim 0");
    std::vector<std::size_t> shape(ndim);
    for (auto& d : shape) {
      d = r.le<std::uint32_t>(label + " dims");
      if (d == 0) throw FormatError(label + " has a zero dimension");
    }
    std::size_t count_elems = shape_product(shape);
    if (count_elems > r.remaining() / 4) {
      throw FormatError("truncated " + label + " payload: expected " +
                        std::to_string(count_elems * 4) + " bytes, got " +
                        std::to_string(r.remaining()));
    }
    std::vector<float> data(count_elems);
    for (auto& v : data) v = r.f32();
    auto dup = std::find_if(entries.begin(), entries.end(),
                            [&](const Entry& e) { return e.name == name; });
    if (dup != entries.end()) throw FormatError("duplicate " + label);
    try {
      entries.push_back(Entry{name, Tensor(std::move(shape), std::move(data))});
    } catch (const ValidationError& e) {
      throw ValidationError(label + ": " + e.what());
    }
  }
  if (r.remaining() != 0) {
    throw FormatError(std::to_string(r.remaining()) + " trailing bytes after last entry");
  }
  return entries;
}

void FeatureBundle::validate() const {
  check_rank(embedding, 1, kEmbeddingEntry);
  for (std::size_t l = 0; l < stages.size(); ++l) check_rank(stages[l], 3, kStageEntries[l]);
  if (text_embedding) check_rank(*text_embedding, 1, kTextEmbeddingEntry);
}

std::uint64_t write_bundle(const FeatureBundle& bundle, std::ostream& out) {
  bundle.validate();
  std::vector<Entry> entries;
  entries.reserve(8 + bundle.extra.size());
  entries.push_back(meta_entry(kImageIdPrefix, bundle.image_id));
  entries.push_back(meta_entry(kExtractorTagPrefix, bundle.extractor_tag));
  entries.push_back(Entry{std::string(kEmbeddingEntry), bundle.embedding});
  for (std::size_t l = 0; l < bundle.stages.size(); ++l) {
    entries.push_back(Entry{std::string(kStageEntries[l]), bundle.stages[l]});
  }
  if (bundle.text_embedding) {
    entries.push_back(Entry{std::string(kTextEmbeddingEntry), *bundle.text_embedding});
  }
  for (const Entry& e : bundle.extra) entries.push_back(e);
  return write_entries(entries, out);
}

FeatureBundle read_bundle(std::istream& in) {
  std::vector<Entry> entries = read_entries(in);
  FeatureBundle b;
  bool have_embedding = false;
  std::array<bool, 4> have_stage{};
  for (Entry& e : entries) {
    if (starts_with(e.name, kImageIdPrefix)) {
      b.image_id = e.name.substr(kImageIdPrefix.size());
    } else if (starts_with(e.name, kExtractorTagPrefix)) {
      b.extractor_tag = e.name.substr(kExtractorTagPrefix.size());
    } else if (e.name == kEmbeddingEntry) {
      b.embedding = std::move(e.tensor);
      have_embedding = true;
    } else if (e.name == kTextEmbeddingEntry) {
      b.text_embedding = std::move(e.tensor);
    } else {
      auto it = std::find(kStageEntries.begin(), kStageEntries.end(), e.name);
      if (it != kStageEntries.end()) {
        auto l = static_cast<std::size_t>(it - kStageEntries.begin());
        b.stages[l] = std::move(e.tensor);
        have_stage[l] = true;
      } else {
        b.extra.push_back(std::move(e));
      }
    }
  }
  if (!have_embedding) throw FormatError("bundle has no 'embedding' entry");
  for (std::size_t l = 0; l < 4; ++l) {
    if (!have_stage[l]) {
      throw FormatError("bundle has no '" + std::string(kStageEntries[l]) + "' entry");
    }
  }
  b.validate();
  return b;
}

void save_bundle(const FeatureBundle& bundle, const std::filesystem::path& path) {
  // Serialize first so a validation failure does not leave a partial file.
  std::ostringstream buf(std::ios::binary);
  write_bundle(bundle, buf);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  const std::string bytes = buf.str();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

FeatureBundle load_bundle(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return read_bundle(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::vector<std::filesystem::path> list_bundles(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw IoError(dir.string() + " is not a directory");
  }
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == kBundleExtension) {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.filename().string() < b.filename().string();
  });
  return out;
}

std::string PairReport::to_string() const {
  if (ok()) return "OK";
  std::string s;
  for (const Mismatch& m : mismatches) {
    if (!s.empty()) s += "; ";
    s += m.where + ": " + m.detail;
  }
  return s;
}

PairReport validate_pair(const FeatureBundle& a, const FeatureBundle& b) {
  PairReport report;
  if (a.embedding.size() != b.embedding.size()) {
    report.mismatches.push_back({std::string(kEmbeddingEntry),
                                 "length " + std::to_string(a.embedding.size()) + " vs " +
                                     std::to_string(b.embedding.size())});
  }
  for (std::size_t l = 0; l < 4; ++l) {
    const Tensor& sa = a.stages[l];
    const Tensor& sb = b.stages[l];
    if (sa.rank() != 3 || sb.rank() != 3) {
      report.mismatches.push_back({std::string(kStageEntries[l]), "not rank-3"});
    } else if (sa.dim(0) != sb.dim(0)) {
      report.mismatches.push_back({std::string(kStageEntries[l]),
                                   "channels " + std::to_string(sa.dim(0)) + " vs " +
                                       std::to_string(sb.dim(0))});
    }
  }
  return report;
}

}  // namespace cpdm
