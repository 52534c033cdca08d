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

#include "cisca/grid.hpp"
#include "cisca/raster.hpp"

namespace cisca::gt {

/// Pixel classes of the ternary map.
enum PixelClass : std::uint8_t {
  kBoundary = 1,
  kBody = 2,
  kBackground = 3,
};

/// Codes in {1, 2, 3}.
using TernaryMap = Raster<std::uint8_t>;
/// Per-pixel cell-type ids, 0 = background type.
using TypeIdMap = Raster<std::uint8_t>;

/// Distance channel order.
enum DistanceChannel : std::size_t {
  kVertical = 0,
  kHorizontal = 1,
  kDiagonalDown = 2,  // top-left to bottom-right
  kDiagonalUp = 3,    // bottom-left to top-right
};
inline constexpr std::size_t kDistanceChannels = 4;

struct TernaryOptions {
  /// Per-instance dilation used to build the overlap-count grid.
  StructuringElement overlap_se = StructuringElement::disk(1);
  /// Element applied twice to grow the overlap region.
  StructuringElement expand_se = StructuringElement::disk(1);
  /// BD/CB components below this pixel count are reassigned.
  int residual_min_area = 4;

  static TernaryOptions from_profile(const MagProfile& profile);
};

/// Ternary BD/CB/BG map built from overlapping instance dilations.
TernaryMap ternary_from_labels(const LabelMap& labels, const TernaryOptions& opts);
TernaryMap ternary_from_labels(const LabelMap& labels, const MagProfile& profile);

/// Mask of pixels covered by the dilations of two or more distinct instances.
Mask overlap_region(const LabelMap& labels, const StructuringElement& se);

/// Four signed, per-instance normalised directional distance maps.
///
/// For an instance with centroid (rc, cc) the raw projections are
/// dr = r - rc, dc = c - cc, (dr + dc) / sqrt2 and (dc - dr) / sqrt2.
/// Positive and negative values of each channel are scaled separately so the
/// instance spans exactly [-1, 1] unless it has no extent along that
/// direction, in which case the channel is 0 on the instance.
Tensor distance_maps_from_labels(const LabelMap& labels);

/// 1.0 inside the dilated BD+CB foreground, 0.05 elsewhere.
Tensor weight_mask(const TernaryMap& ternary, const MagProfile& profile);
Tensor weight_mask(const TernaryMap& ternary, const StructuringElement& se);

inline constexpr double kBackgroundWeight = 0.05;

/// One-hot encoding of a ternary map: BD, CB, BG -> channels 0, 1, 2.
Tensor one_hot_ternary(const TernaryMap& ternary);

/// One-hot encoding of integer codes used directly as channel indices.
Tensor one_hot(const Raster<std::uint8_t>& codes, std::size_t channels);

/// Per-pixel argmax over channels (lowest index wins ties).
Raster<std::uint8_t> argmax_channels(const Tensor& t);

void validate_ternary(const TernaryMap& ternary);

}  // namespace cisca::gt
