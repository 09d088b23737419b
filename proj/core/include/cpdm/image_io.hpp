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

#ifndef CPDM_IMAGE_IO_HPP_
#define CPDM_IMAGE_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cpdm/tensor.hpp"

namespace cpdm {

// Binary PPM (P6) -> [3, H, W] with pixels scaled into [0, 1].
// Accepts maxval up to 65535 (two-byte big-endian samples above 255).
Tensor read_ppm(const std::string& bytes);
Tensor load_ppm(const std::filesystem::path& path);

// [3, H, W] in [0, 1] -> binary PPM (P6, maxval 255).
std::string write_ppm(const Tensor& image);

// Binary PGM (P5, maxval 255) from row-major 8-bit pixels, with an optional
// comment line after the magic.
std::string write_pgm(std::size_t width, std::size_t height, const std::vector<std::uint8_t>& pixels,
                      const std::string& comment = {});

void write_file(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace cpdm

#endif  // CPDM_IMAGE_IO_HPP_
