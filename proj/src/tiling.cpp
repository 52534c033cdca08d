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

#include "cisca/tiling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cisca::tiling {

TileGrid plan_tiles(std::size_t height, std::size_t width, std::size_t tile,
                    std::size_t stride) {
  if (height == 0 || width == 0) throw std::invalid_argument("image must be non-empty");
  if (tile == 0 || tile % 2 != 0) throw std::invalid_argument("tile size must be even");
  if (stride != tile / 2) throw std::invalid_argument("stride must be tile/2 (50% overlap)");

  TileGrid g;
  g.height = height;
  g.width = width;
  g.tile = tile;
  g.stride = stride;
  g.pad_top = g.pad_left = tile / 2;
  auto extent = [&](std::size_t n) {
    return tile + ((n + stride - 1) / stride) * stride;
  };
  g.padded_height = extent(height);
  g.padded_width = extent(width);
  g.pad_bottom = g.padded_height - height - g.pad_top;
  g.pad_right = g.padded_width - width - g.pad_left;
  for (std::size_t r = 0; r + tile <= g.padded_height; r += stride) {
    for (std::size_t c = 0; c + tile <= g.padded_width; c += stride) {
      g.offsets.push_back({r, c});
    }
  }
  return g;
}

std::vector<double> spline_profile(std::size_t tile, int power) {
  if (tile == 0 || tile % 2 != 0) throw std::invalid_argument("tile size must be even");
  if (power < 1) throw std::invalid_argument("spline power must be >= 1");
  std::vector<double> s(tile);
  for (std::size_t i = 0; i < tile; ++i) {
    const double t = (static_cast<double>(i) + 0.5) / static_cast<double>(tile);
    // Triangle coordinate: 0 at the tile borders, 1 at the centre.
    const double tri = 1.0 - std::abs(2.0 * t - 1.0);
    double v = tri < 0.5 ? std::pow(2.0 * tri, power) / 2.0
                         : 1.0 - std::pow(2.0 * (1.0 - tri), power) / 2.0;
    s[i] = std::max(v, kWindowFloor);
  }
  return s;
}

Tensor spline_window(std::size_t tile, int power) {
  const auto s = spline_profile(tile, power);
  Tensor w(tile, tile, 1, 0.0);
  for (std::size_t r = 0; r < tile; ++r) {
    for (std::size_t c = 0; c < tile; ++c) w(r, c) = s[r] * s[c];
  }
  return w;
}

std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) {
  if (n == 1) return 0;
  const auto period = static_cast<std::ptrdiff_t>(2 * (n - 1));
  std::ptrdiff_t m = i % period;
  if (m < 0) m += period;
  if (m >= static_cast<std::ptrdiff_t>(n)) m = period - m;
  return static_cast<std::size_t>(m);
}

std::vector<Tile> extract_tiles(const Tensor& image, const TileGrid& grid) {
  if (!image.same_plane(grid.height, grid.width)) {
    throw DataError("extract_tiles: image size does not match the tile plan");
  }
  const std::size_t ch = image.channels();
  std::vector<Tile> tiles(grid.offsets.size());
  const auto count = static_cast<std::ptrdiff_t>(grid.offsets.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t t = 0; t < count; ++t) {
    const auto& off = grid.offsets[static_cast<std::size_t>(t)];
    Tensor data(grid.tile, grid.tile, ch, 0.0);
    for (std::size_t r = 0; r < grid.tile; ++r) {
      const auto sr = reflect_index(static_cast<std::ptrdiff_t>(off.row + r) -
                                        static_cast<std::ptrdiff_t>(grid.pad_top),
                                    grid.height);
      for (std::size_t c = 0; c < grid.tile; ++c) {
        const auto sc = reflect_index(static_cast<std::ptrdiff_t>(off.col + c) -
                                          static_cast<std::ptrdiff_t>(grid.pad_left),
                                      grid.width);
        for (std::size_t k = 0; k < ch; ++k) data(r, c, k) = image(sr, sc, k);
      }
    }
    tiles[static_cast<std::size_t>(t)] = Tile{off, std::move(data)};
  }
  return tiles;
}

namespace {

// Maps every planned offset to its tile and checks shapes.
std::vector<const Tile*> match_tiles(std::span<const Tile> tiles, const TileGrid& grid,
                                     const Tensor& window, std::size_t& channels) {
  if (window.height() != grid.tile || window.width() != grid.tile) {
    throw DataError("blend window size does not match the tile size");
  }
  if (tiles.size() != grid.offsets.size()) {
    throw DataError("expected " + std::to_string(grid.offsets.size()) + " tiles, got " +
                    std::to_string(tiles.size()));
  }
  std::vector<const Tile*> ordered(grid.offsets.size(), nullptr);
  const std::size_t per_row = (grid.padded_width - grid.tile) / grid.stride + 1;
  channels = tiles.front().data.channels();
  for (const auto& t : tiles) {
    if (t.offset.row % grid.stride != 0 || t.offset.col % grid.stride != 0 ||
        t.offset.row + grid.tile > grid.padded_height ||
        t.offset.col + grid.tile > grid.padded_width) {
      throw DataError("tile offset (" + std::to_string(t.offset.row) + "," +
                      std::to_string(t.offset.col) + ") is not in the plan");
    }
    if (t.data.height() != grid.tile || t.data.width() != grid.tile ||
        t.data.channels() != channels) {
      throw DataError("tile at (" + std::to_string(t.offset.row) + "," +
                      std::to_string(t.offset.col) + ") has the wrong shape");
    }
    const std::size_t slot = (t.offset.row / grid.stride) * per_row + t.offset.col / grid.stride;
    if (ordered[slot]) throw DataError("duplicate tile in blend input");
    ordered[slot] = &t;
  }
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    if (!ordered[i]) {
      throw DataError("missing tile at (" + std::to_string(grid.offsets[i].row) + "," +
                      std::to_string(grid.offsets[i].col) + ")");
    }
  }
  return ordered;
}

Tensor normalize_and_crop(const Tensor& acc, const std::vector<double>& weight,
                          const TileGrid& grid, std::size_t ch) {
  Tensor out(grid.height, grid.width, ch, 0.0);
  for (std::size_t r = 0; r < grid.height; ++r) {
    for (std::size_t c = 0; c < grid.width; ++c) {
      const std::size_t pr = r + grid.pad_top;
      const std::size_t pc = c + grid.pad_left;
      const double wsum = weight[pr * grid.padded_width + pc];
      for (std::size_t k = 0; k < ch; ++k) out(r, c, k) = acc(pr, pc, k) / wsum;
    }
  }
  return out;
}

}  // namespace

Tensor blend_untile(std::span<const Tile> tiles, const TileGrid& grid,
                    const Tensor& window) {
  std::size_t ch = 0;
  const auto ordered = match_tiles(tiles, grid, window, ch);
  Tensor acc(grid.padded_height, grid.padded_width, ch, 0.0);
  std::vector<double> weight(grid.padded_height * grid.padded_width, 0.0);
  const auto tile = static_cast<std::ptrdiff_t>(grid.tile);
  // Rows inside one tile are disjoint, so each tile is accumulated in
  // parallel over its rows; tiles themselves are applied in plan order.
  for (const Tile* t : ordered) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t rr = 0; rr < tile; ++rr) {
      const auto r = static_cast<std::size_t>(rr);
      const std::size_t pr = t->offset.row + r;
      for (std::size_t c = 0; c < grid.tile; ++c) {
        const double wv = window(r, c);
        const std::size_t pc = t->offset.col + c;
        weight[pr * grid.padded_width + pc] += wv;
        for (std::size_t k = 0; k < ch; ++k) acc(pr, pc, k) += wv * t->data(r, c, k);
      }
    }
  }
  return normalize_and_crop(acc, weight, grid, ch);
}

namespace serial {

Tensor blend_untile(std::span<const Tile> tiles, const TileGrid& grid,
                    const Tensor& window) {
  std::size_t ch = 0;
  const auto ordered = match_tiles(tiles, grid, window, ch);
  Tensor acc(grid.padded_height, grid.padded_width, ch, 0.0);
  std::vector<double> weight(grid.padded_height * grid.padded_width, 0.0);
  for (const Tile* t : ordered) {
    for (std::size_t r = 0; r < grid.tile; ++r) {
      for (std::size_t c = 0; c < grid.tile; ++c) {
        const double wv = window(r, c);
        const std::size_t pr = t->offset.row + r;
        const std::size_t pc = t->offset.col + c;
        weight[pr * grid.padded_width + pc] += wv;
        for (std::size_t k = 0; k < ch; ++k) acc(pr, pc, k) += wv * t->data(r, c, k);
      }
    }
  }
  return normalize_and_crop(acc, weight, grid, ch);
}

}  // namespace serial

}  // namespace cisca::tiling
