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

#include "cisca/raster.hpp"

namespace cisca::post {

using Kernel5 = std::array<std::array<double, 5>, 5>;

/// Oriented 5x5 derivative kernels, one per distance channel, in channel
/// order (vertical, horizontal, diagonal down, diagonal up). Each kernel,
/// applied by correlation, responds positively to values increasing along
/// its direction.
struct SobelBank {
  std::array<Kernel5, 4> kernels{};
};

/// Sx = smooth [1 4 6 4 1] (rows) x derivative [-1 -2 0 2 1] (cols),
/// Sy = Sx^T, diagonals (Sx + Sy) / 2 and (Sx - Sy) / 2.
SobelBank sobel_bank();

/// Correlates channel `channel` of `src` with `kernel`, zero padding outside
/// the grid. Returns a single-channel tensor.
Tensor correlate5(const Tensor& src, std::size_t channel, const Kernel5& kernel);

/// Applies bank kernel k to channel k for every channel of a 4-channel tensor.
Tensor directional_gradients(const Tensor& dist, const SobelBank& bank);

namespace serial {

Tensor correlate5(const Tensor& src, std::size_t channel, const Kernel5& kernel);

}  // namespace serial

}  // namespace cisca::post
