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

#include <array>
#include <cstdint>
#include <map>
#include <string>

#include "cisca/sampling.hpp"

namespace cisca::synth {

inline const std::array<const char*, 6> kConicClasses{
    "neutrophil", "epithelial", "lymphocyte", "plasma", "eosinophil", "connective"};
inline const std::array<std::int64_t, 6> kConicCounts{4232, 202125, 85977, 23171, 3156, 93795};
constexpr std::int64_t kConicImages = 3589;

/// A manifest with the published per-class training totals spread over the
/// published number of images.
inline sampling::DatasetManifest conic_manifest() {
  sampling::DatasetManifest m;
  m.classes.assign(kConicClasses.begin(), kConicClasses.end());
  m.rows.resize(kConicImages);
  for (std::int64_t i = 0; i < kConicImages; ++i) {
    auto& row = m.rows[static_cast<std::size_t>(i)];
    row.image_id = "img" + std::to_string(i);
    row.counts.resize(6);
    for (std::size_t c = 0; c < 6; ++c) {
      const std::int64_t lo = kConicCounts[c] * i / kConicImages;
      const std::int64_t hi = kConicCounts[c] * (i + 1) / kConicImages;
      row.counts[c] = hi - lo;
    }
  }
  return m;
}

inline std::map<std::string, double> conic_alphas() {
  return {{"neutrophil", 1.6}, {"eosinophil", 1.6}, {"epithelial", 0.9},
          {"lymphocyte", 0.9}, {"plasma", 0.9},     {"connective", 0.9}};
}

}  // namespace cisca::synth
