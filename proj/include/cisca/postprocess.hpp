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
#include <optional>
#include <vector>

#include "cisca/grid.hpp"
#include "cisca/raster.hpp"
#include "cisca/sobel.hpp"

namespace cisca::post {

struct PostprocessConfig {
  /// Edge binarisation threshold on the normalised Sobel response.
  double theta1 = 0.57;
  /// Minimum instance area in pixels; instances below it are deleted.
  int theta2 = 10;
  MagProfile profile = MagProfile::for_magnification(Magnification::k20x);

  static PostprocessConfig for_profile(const MagProfile& profile);
  void validate() const;
};

struct InstanceType {
  std::int32_t id = 0;
  std::int32_t type = 0;
  double vote_fraction = 0.0;
};
using InstanceTypeTable = std::vector<InstanceType>;

/// Min-max rescales one channel to [0, 1] in place; a constant channel
/// becomes all zeros.
void normalize_min_max(Tensor& t, std::size_t channel);

/// Per-pixel maximum over the four normalised edge responses. Each distance
/// channel is min-max normalised, filtered with its oriented kernel, negated
/// (so that the +1 -> -1 seam between adjacent instances is the strongest
/// response) and min-max normalised again.
Tensor edge_strength(const Tensor& dist, const SobelBank& bank);

/// E = edge_strength > theta1.
Mask edge_mask(const Tensor& dist, const SobelBank& bank, double theta1);

/// FG = P_BD + P_CB > P_BG.
Mask foreground_mask(const Tensor& prob);

/// Marker pixels: P_CB > P_BD, P_CB > P_BG and not an edge.
Mask marker_mask(const Tensor& prob, const Mask& edges);

/// (1 - P_CB) + (1 - FG * (1 - E)).
Tensor topographic_map(const Tensor& prob, const Mask& fg, const Mask& edges);

/// Marker-controlled priority-flood watershed over 8-connected pixels,
/// restricted to `region`. Pixels dequeue by (height, insertion order), so
/// equal heights flood breadth-first from the marker fronts. Region pixels
/// no marker reaches stay 0.
LabelMap watershed(const Tensor& topo, const LabelMap& markers, const Mask& region);

/// Majority vote of per-pixel type argmax within each instance. Channel 0 is
/// the background type and does not vote; an instance with no
/// non-background votes takes the non-background type with the highest mean
/// probability.
InstanceTypeTable assign_types(const LabelMap& labels, const Tensor& type_prob);

struct PostprocessResult {
  LabelMap labels;
  std::optional<InstanceTypeTable> types;
};

PostprocessResult postprocess(const Tensor& prob, const Tensor& dist,
                              const Tensor* type_prob, const PostprocessConfig& cfg);

namespace serial {

Tensor edge_strength(const Tensor& dist, const SobelBank& bank);

}  // namespace serial

}  // namespace cisca::post
