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

#include <cstddef>
#include <span>
#include <vector>

#include "cisca/raster.hpp"

namespace cisca::tiling {

struct TileOffset {
  std::size_t row = 0;
  std::size_t col = 0;
  bool operator==(const TileOffset&) const = default;
};

/// Tile layout over a reflect-padded image. Offsets are in padded
/// coordinates; the original image starts at (pad_top, pad_left).
struct TileGrid {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t tile = 256;
  std::size_t stride = 128;
  std::size_t pad_top = 0;
  std::size_t pad_left = 0;
  std::size_t pad_bottom = 0;
  std::size_t pad_right = 0;
  std::size_t padded_height = 0;
  std::size_t padded_width = 0;
  std::vector<TileOffset> offsets;  // row-major
};

/// Pads by tile/2 on every side, then extends bottom/right until
/// (extent - tile) is a multiple of stride.
TileGrid plan_tiles(std::size_t height, std::size_t width, std::size_t tile = 256,
                    std::size_t stride = 128);

/// Separable second-order spline window, tile x tile.
Tensor spline_window(std::size_t tile, int power = 2);

/// 1-D window profile used by spline_window.
std::vector<double> spline_profile(std::size_t tile, int power = 2);

inline constexpr double kWindowFloor = 1e-3;

struct Tile {
  TileOffset offset;
  Tensor data;
};

/// Reflect-pads `image` per `grid` and cuts one tile per planned offset.
std::vector<Tile> extract_tiles(const Tensor& image, const TileGrid& grid);

/// Window-weighted average of overlapping tile predictions, cropped back to
/// the original image size. Requires exactly one tile per planned offset.
Tensor blend_untile(std::span<const Tile> tiles, const TileGrid& grid,
                    const Tensor& window);

/// Index into [0, n) mirrored about the edges without repeating them.
std::size_t reflect_index(std::ptrdiff_t i, std::size_t n);

namespace serial {

Tensor blend_untile(std::span<const Tile> tiles, const TileGrid& grid,
                    const Tensor& window);

}  // namespace serial

}  // namespace cisca::tiling
