/******************************************************************************
 * Copyright 2026 The cisca-kit Authors. All Rights Reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *****************************************************************************/

#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "json.hpp"

#include "cisca/metrics.hpp"
#include "cisca/postprocess.hpp"
#include "cisca/raster.hpp"

// File formats shared by the command-line tool.
namespace cisca::io {

namespace fs = std::filesystem;

/// Single-channel 8- or 16-bit grayscale PNG as instance ids.
LabelMap read_label_png(const fs::path& path);
/// 16-bit grayscale PNG; ids must fit in [0, 65535].
void write_label_png(const fs::path& path, const LabelMap& labels);

/// 8-bit grayscale PNG, raw values (ternary codes, type ids).
Raster<std::uint8_t> read_gray8_png(const fs::path& path);
void write_gray8_png(const fs::path& path, const Raster<std::uint8_t>& img);

/// Binary mask; any nonzero value reads as 1, written as {0, 255}.
Mask read_mask_png(const fs::path& path);
void write_mask_png(const fs::path& path, const Mask& mask);

/// RGB image; gray and alpha inputs are expanded or stripped.
Image8 read_rgb_png(const fs::path& path);
void write_rgb_png(const fs::path& path, const Image8& rgb);

/// `<data>.json` next to a raw float file.
fs::path sidecar_path(const fs::path& data);

/// Raw little-endian f32, row-major channel-last, with JSON sidecar.
Tensor read_f32(const fs::path& path);
void write_f32(const fs::path& path, const Tensor& t);

/// Rounds to 6 decimals for stable JSON output.
double round6(double v);

nlohmann::json type_table_json(const post::InstanceTypeTable& table);
post::InstanceTypeTable read_type_table(const fs::path& path);
/// Instance id -> type id view of a type-table file.
metrics::TypeTable read_type_map(const fs::path& path);

nlohmann::json read_json(const fs::path& path);
/// Pretty-printed with a trailing newline.
void write_json(const fs::path& path, const nlohmann::json& j);
void write_json(const fs::path& path, const nlohmann::ordered_json& j);

}  // namespace cisca::io
