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

#include "cisca/grid.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace cisca {

std::vector<std::pair<int, int>> StructuringElement::offsets() const {
  if (radius < 1) {
    throw std::invalid_argument("structuring element radius must be >= 1");
  }
  std::vector<std::pair<int, int>> out;
  const int r2 = radius * radius;
  for (int dr = -radius; dr <= radius; ++dr) {
    for (int dc = -radius; dc <= radius; ++dc) {
      if (shape == SeShape::kSquare || dr * dr + dc * dc <= r2) {
        out.emplace_back(dr, dc);
      }
    }
  }
  return out;
}

Magnification parse_magnification(std::string_view text) {
  if (text == "20x" || text == "20X" || text == "20") return Magnification::k20x;
  if (text == "40x" || text == "40X" || text == "40") return Magnification::k40x;
  throw std::invalid_argument("unknown magnification '" + std::string(text) +
                              "' (expected 20x or 40x)");
}

std::string_view to_string(Magnification mag) {
  return mag == Magnification::k20x ? "20x" : "40x";
}

MagProfile MagProfile::for_magnification(Magnification mag) {
  MagProfile p;
  p.magnification = mag;
  if (mag == Magnification::k20x) {
    p.match_radius = 6.0;
    p.gt_dilate = StructuringElement::disk(1);
    p.post_dilate = StructuringElement::disk(1);
    p.min_instance_area = 10;
  } else {
    p.match_radius = 12.0;
    p.gt_dilate = StructuringElement::disk(2);
    p.post_dilate = StructuringElement::disk(2);
    p.min_instance_area = 30;
  }
  return p;
}

LabelMap connected_components(const Mask& mask) {
  const auto h = static_cast<int>(mask.height());
  const auto w = static_cast<int>(mask.width());
  LabelMap out(mask.height(), mask.width(), 1, 0);
  std::vector<int> stack;
  std::int32_t next = 0;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!mask(r, c) || out(r, c) != 0) continue;
      ++next;
      out(r, c) = next;
      stack.push_back(r * w + c);
      while (!stack.empty()) {
        const int p = stack.back();
        stack.pop_back();
        const int pr = p / w;
        const int pc = p % w;
        for (int dr = -1; dr <= 1; ++dr) {
          const int nr = pr + dr;
          if (nr < 0 || nr >= h) continue;
          for (int dc = -1; dc <= 1; ++dc) {
            const int nc = pc + dc;
            if (nc < 0 || nc >= w) continue;
            if (mask(nr, nc) && out(nr, nc) == 0) {
              out(nr, nc) = next;
              stack.push_back(nr * w + nc);
            }
          }
        }
      }
    }
  }
  return out;
}

namespace {

// Gather form of dilation for one output row. The elements are symmetric,
// so gathering from +offset equals scattering by -offset.
inline void dilate_row(const Mask& mask, Mask& out, int r,
                       const std::vector<std::pair<int, int>>& offsets) {
  const auto h = static_cast<int>(mask.height());
  const auto w = static_cast<int>(mask.width());
  for (int c = 0; c < w; ++c) {
    std::uint8_t v = 0;
    for (const auto& [dr, dc] : offsets) {
      const int sr = r + dr;
      const int sc = c + dc;
      if (sr < 0 || sr >= h || sc < 0 || sc >= w) continue;
      if (mask(sr, sc)) {
        v = 1;
        break;
      }
    }
    out(r, c) = v;
  }
}

}  // namespace

Mask dilate(const Mask& mask, const StructuringElement& se) {
  const auto offsets = se.offsets();
  Mask out(mask.height(), mask.width(), 1, 0);
  const auto h = static_cast<int>(mask.height());
#pragma omp parallel for schedule(static)
  for (int r = 0; r < h; ++r) {
    dilate_row(mask, out, r, offsets);
  }
  return out;
}

namespace serial {

Mask dilate(const Mask& mask, const StructuringElement& se) {
  const auto h = static_cast<int>(mask.height());
  const auto w = static_cast<int>(mask.width());
  Mask out(mask.height(), mask.width(), 1, 0);
  for (const auto& [dr, dc] : se.offsets()) {
    for (int r = 0; r < h; ++r) {
      const int tr = r + dr;
      if (tr < 0 || tr >= h) continue;
      for (int c = 0; c < w; ++c) {
        const int tc = c + dc;
        if (tc < 0 || tc >= w) continue;
        if (mask(r, c)) out(tr, tc) = 1;
      }
    }
  }
  return out;
}

}  // namespace serial

std::int32_t max_label(const LabelMap& labels) {
  std::int32_t m = 0;
  for (auto v : labels.values()) m = std::max(m, v);
  return m;
}

std::vector<std::int64_t> label_areas(const LabelMap& labels) {
  std::vector<std::int64_t> areas(static_cast<std::size_t>(max_label(labels)) + 1, 0);
  for (auto v : labels.values()) ++areas[static_cast<std::size_t>(v)];
  return areas;
}

std::vector<InstanceStats> instance_centroids(const LabelMap& labels) {
  const auto n = static_cast<std::size_t>(max_label(labels)) + 1;
  std::vector<std::int64_t> area(n, 0), sr(n, 0), sc(n, 0);
  for (std::size_t r = 0; r < labels.height(); ++r) {
    for (std::size_t c = 0; c < labels.width(); ++c) {
      const auto id = static_cast<std::size_t>(labels(r, c));
      if (id == 0) continue;
      ++area[id];
      sr[id] += static_cast<std::int64_t>(r);
      sc[id] += static_cast<std::int64_t>(c);
    }
  }
  std::vector<InstanceStats> out;
  for (std::size_t id = 1; id < n; ++id) {
    if (area[id] == 0) continue;
    out.push_back({static_cast<std::int32_t>(id),
                   static_cast<double>(sr[id]) / static_cast<double>(area[id]),
                   static_cast<double>(sc[id]) / static_cast<double>(area[id]),
                   area[id]});
  }
  return out;
}

LabelMap remove_small_instances(const LabelMap& labels, std::int64_t min_area) {
  const auto areas = label_areas(labels);
  std::vector<std::int32_t> remap(areas.size(), 0);
  std::int32_t next = 0;
  for (std::size_t id = 1; id < areas.size(); ++id) {
    if (areas[id] > 0 && areas[id] >= min_area) {
      remap[id] = ++next;
    }
  }
  LabelMap out(labels.height(), labels.width(), 1, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out[i] = remap[static_cast<std::size_t>(labels[i])];
  }
  return out;
}

LabelMap relabel_sequential(const LabelMap& labels) {
  std::vector<std::int32_t> remap(static_cast<std::size_t>(max_label(labels)) + 1, 0);
  std::int32_t next = 0;
  LabelMap out(labels.height(), labels.width(), 1, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto id = static_cast<std::size_t>(labels[i]);
    if (id == 0) continue;
    if (remap[id] == 0) remap[id] = ++next;
    out[i] = remap[id];
  }
  return out;
}

Mask foreground(const LabelMap& labels) {
  Mask out(labels.height(), labels.width(), 1, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = labels[i] > 0 ? 1 : 0;
  return out;
}

void validate_labels(const LabelMap& labels) {
  if (labels.channels() != 1) throw DataError("label map must be single-channel");
  for (auto v : labels.values()) {
    if (v < 0) throw DataError("label map contains negative id " + std::to_string(v));
  }
}

}  // namespace cisca
