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

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "cisca/raster.hpp"

namespace cisca {

enum class SeShape { kDisk, kSquare };

/// Flat structuring element centred on the origin.
struct StructuringElement {
  SeShape shape = SeShape::kDisk;
  int radius = 1;

  static StructuringElement disk(int r) { return {SeShape::kDisk, r}; }
  static StructuringElement square(int r) { return {SeShape::kSquare, r}; }

  /// (dr, dc) offsets covered by the element, in raster order.
  std::vector<std::pair<int, int>> offsets() const;
};

enum class Magnification { k20x, k40x };

Magnification parse_magnification(std::string_view text);
std::string_view to_string(Magnification mag);

/// Magnification-dependent morphology and matching parameters.
struct MagProfile {
  Magnification magnification = Magnification::k20x;
  double match_radius = 6.0;
  StructuringElement gt_dilate = StructuringElement::disk(1);
  StructuringElement post_dilate = StructuringElement::disk(1);
  int min_instance_area = 10;
  /// Residual components smaller than this are reassigned during GT cleanup.
  int residual_min_area = 4;

  static MagProfile for_magnification(Magnification mag);
};

/// 8-connected components of the non-zero pixels of `mask`. Ids are
/// consecutive from 1 in raster order of each component's first pixel.
LabelMap connected_components(const Mask& mask);

/// Binary dilation; the element is clipped at the grid border.
Mask dilate(const Mask& mask, const StructuringElement& se);

struct InstanceStats {
  std::int32_t id = 0;
  double row = 0.0;
  double col = 0.0;
  std::int64_t area = 0;
};

/// Unweighted centroid and pixel area of every instance, ids ascending.
std::vector<InstanceStats> instance_centroids(const LabelMap& labels);

/// Largest id present (0 for an all-background map).
std::int32_t max_label(const LabelMap& labels);

/// Pixel count per id, indexed by id (entry 0 counts background).
std::vector<std::int64_t> label_areas(const LabelMap& labels);

/// Zeroes instances with area < min_area and renumbers the survivors
/// consecutively, preserving their relative id order.
LabelMap remove_small_instances(const LabelMap& labels, std::int64_t min_area);

/// Renumbers ids consecutively in order of first appearance (raster scan).
LabelMap relabel_sequential(const LabelMap& labels);

Mask foreground(const LabelMap& labels);

/// Checks that every value is >= 0; throws DataError otherwise.
void validate_labels(const LabelMap& labels);

namespace serial {

/// Single-threaded reference for cisca::dilate.
Mask dilate(const Mask& mask, const StructuringElement& se);

}  // namespace serial

}  // namespace cisca
