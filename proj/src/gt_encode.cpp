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

#include "cisca/gt_encode.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <string>
#include <vector>

namespace cisca::gt {

TernaryOptions TernaryOptions::from_profile(const MagProfile& profile) {
  return {profile.gt_dilate, profile.gt_dilate, profile.residual_min_area};
}

Mask overlap_region(const LabelMap& labels, const StructuringElement& se) {
  const auto offsets = se.offsets();
  const auto h = static_cast<int>(labels.height());
  const auto w = static_cast<int>(labels.width());
  Mask out(labels.height(), labels.width(), 1, 0);
  // A pixel lies in the dilation of instance s iff some pixel of s sits at a
  // (symmetric) element offset from it, so T > 1 iff two distinct ids appear
  // in its neighbourhood.
#pragma omp parallel for schedule(static)
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      std::int32_t first = 0;
      for (const auto& [dr, dc] : offsets) {
        const int sr = r + dr;
        const int sc = c + dc;
        if (sr < 0 || sr >= h || sc < 0 || sc >= w) continue;
        const auto id = labels(sr, sc);
        if (id == 0) continue;
        if (first == 0) {
          first = id;
        } else if (id != first) {
          out(r, c) = 1;
          break;
        }
      }
    }
  }
  return out;
}

namespace {

// Reassigns 8-connected components of `from` smaller than min_area to `to`.
void reassign_small_components(TernaryMap& map, std::uint8_t from,
                               std::uint8_t to, int min_area) {
  if (min_area <= 1) return;
  Mask cls(map.height(), map.width(), 1, 0);
  for (std::size_t i = 0; i < map.size(); ++i) cls[i] = map[i] == from ? 1 : 0;
  const auto comps = connected_components(cls);
  const auto areas = label_areas(comps);
  for (std::size_t i = 0; i < map.size(); ++i) {
    const auto id = static_cast<std::size_t>(comps[i]);
    if (id != 0 && areas[id] < min_area) map[i] = to;
  }
}

}  // namespace

TernaryMap ternary_from_labels(const LabelMap& labels, const TernaryOptions& opts) {
  validate_labels(labels);
  const Mask overlap = overlap_region(labels, opts.overlap_se);
  const Mask expanded = dilate(dilate(overlap, opts.expand_se), opts.expand_se);

  TernaryMap out(labels.height(), labels.width(), 1, kBackground);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] > 0) out[i] = expanded[i] ? kBoundary : kBody;
  }
  reassign_small_components(out, kBoundary, kBody, opts.residual_min_area);
  reassign_small_components(out, kBody, kBackground, opts.residual_min_area);
  return out;
}

TernaryMap ternary_from_labels(const LabelMap& labels, const MagProfile& profile) {
  return ternary_from_labels(labels, TernaryOptions::from_profile(profile));
}

Tensor distance_maps_from_labels(const LabelMap& labels) {
  validate_labels(labels);
  const auto n = static_cast<std::size_t>(max_label(labels)) + 1;
  std::vector<std::int64_t> area(n, 0), sum_r(n, 0), sum_c(n, 0);
  for (std::size_t r = 0; r < labels.height(); ++r) {
    for (std::size_t c = 0; c < labels.width(); ++c) {
      const auto id = static_cast<std::size_t>(labels(r, c));
      if (id == 0) continue;
      ++area[id];
      sum_r[id] += static_cast<std::int64_t>(r);
      sum_c[id] += static_cast<std::int64_t>(c);
    }
  }

  // Raw projections scaled by area * sqrt2 (diagonals) are exact integers:
  // area * (r - rc) = area * r - sum_r. The per-channel normalisation cancels
  // the common scale.
  auto raw = [&](std::size_t id, std::size_t r, std::size_t c,
                 std::array<std::int64_t, kDistanceChannels>& out) {
    const std::int64_t dr = area[id] * static_cast<std::int64_t>(r) - sum_r[id];
    const std::int64_t dc = area[id] * static_cast<std::int64_t>(c) - sum_c[id];
    out = {dr, dc, dr + dc, dc - dr};
  };

  std::vector<std::array<std::int64_t, kDistanceChannels>> pos_max(n), neg_max(n);
  std::array<std::int64_t, kDistanceChannels> v{};
  for (std::size_t r = 0; r < labels.height(); ++r) {
    for (std::size_t c = 0; c < labels.width(); ++c) {
      const auto id = static_cast<std::size_t>(labels(r, c));
      if (id == 0) continue;
      raw(id, r, c, v);
      for (std::size_t k = 0; k < kDistanceChannels; ++k) {
        pos_max[id][k] = std::max(pos_max[id][k], v[k]);
        neg_max[id][k] = std::max(neg_max[id][k], -v[k]);
      }
    }
  }

  Tensor out(labels.height(), labels.width(), kDistanceChannels, 0.0);
  const auto h = static_cast<std::ptrdiff_t>(labels.height());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t rr = 0; rr < h; ++rr) {
    const auto r = static_cast<std::size_t>(rr);
    std::array<std::int64_t, kDistanceChannels> pv{};
    for (std::size_t c = 0; c < labels.width(); ++c) {
      const auto id = static_cast<std::size_t>(labels(r, c));
      if (id == 0) continue;
      raw(id, r, c, pv);
      for (std::size_t k = 0; k < kDistanceChannels; ++k) {
        double value = 0.0;
        if (pv[k] > 0) {
          value = static_cast<double>(pv[k]) / static_cast<double>(pos_max[id][k]);
        } else if (pv[k] < 0) {
          value = static_cast<double>(pv[k]) / static_cast<double>(neg_max[id][k]);
        }
        out(r, c, k) = value;
      }
    }
  }
  return out;
}

void validate_ternary(const TernaryMap& ternary) {
  if (ternary.channels() != 1) throw DataError("ternary map must be single-channel");
  for (auto v : ternary.values()) {
    if (v < kBoundary || v > kBackground) {
      throw DataError("ternary map contains code " + std::to_string(v) +
                      " outside {1,2,3}");
    }
  }
}

Tensor weight_mask(const TernaryMap& ternary, const StructuringElement& se) {
  validate_ternary(ternary);
  Mask fg(ternary.height(), ternary.width(), 1, 0);
  for (std::size_t i = 0; i < ternary.size(); ++i) {
    fg[i] = ternary[i] != kBackground ? 1 : 0;
  }
  const Mask grown = dilate(fg, se);
  Tensor out(ternary.height(), ternary.width(), 1, kBackgroundWeight);
  for (std::size_t i = 0; i < grown.size(); ++i) {
    if (grown[i]) out[i] = 1.0;
  }
  return out;
}

Tensor weight_mask(const TernaryMap& ternary, const MagProfile& profile) {
  return weight_mask(ternary, profile.post_dilate);
}

Tensor one_hot(const Raster<std::uint8_t>& codes, std::size_t channels) {
  if (codes.channels() != 1) throw DataError("one_hot expects a single-channel map");
  Tensor out(codes.height(), codes.width(), channels, 0.0);
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (codes[i] >= channels) {
      throw DataError("code " + std::to_string(codes[i]) + " at pixel " +
                      std::to_string(i) + " is out of range for " +
                      std::to_string(channels) + " channels");
    }
    out[i * channels + codes[i]] = 1.0;
  }
  return out;
}

Tensor one_hot_ternary(const TernaryMap& ternary) {
  validate_ternary(ternary);
  Raster<std::uint8_t> shifted = ternary;
  for (auto& v : shifted.storage()) v = static_cast<std::uint8_t>(v - 1);
  return one_hot(shifted, 3);
}

Raster<std::uint8_t> argmax_channels(const Tensor& t) {
  Raster<std::uint8_t> out(t.height(), t.width(), 1, 0);
  const std::size_t ch = t.channels();
  for (std::size_t p = 0; p < t.pixels(); ++p) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < ch; ++k) {
      if (t[p * ch + k] > t[p * ch + best]) best = k;
    }
    out[p] = static_cast<std::uint8_t>(best);
  }
  return out;
}

}  // namespace cisca::gt
