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

#include <optional>

namespace cisca {

/// Sets the OpenMP team size. Order of precedence: `requested`, then the
/// CISCA_KIT_THREADS environment variable, then the number of logical cores.
/// Returns the count in effect.
int configure_threads(std::optional<int> requested = std::nullopt);

/// Threads the next parallel region will use.
int thread_count();

}  // namespace cisca
