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
#include <vector>

namespace cisca::metrics {

/// Dense row-major cost matrix.
struct CostMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> cost;

  double operator()(std::size_t r, std::size_t c) const { return cost[r * cols + c]; }
};

/// Minimum-cost assignment (Hungarian method with potentials). Every row is
/// assigned when rows <= cols, every column otherwise. Returns, per row, the
/// assigned column or -1.
std::vector<int> solve_assignment(const CostMatrix& m);

}  // namespace cisca::metrics
