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

#include "cisca/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>

namespace cisca {

int configure_threads(std::optional<int> requested) {
  int n = 0;
  if (requested) {
    n = *requested;
    if (n <= 0) throw std::invalid_argument("thread count must be positive");
  } else if (const char* env = std::getenv("CISCA_KIT_THREADS"); env && *env) {
    try {
      std::size_t used = 0;
      n = std::stoi(env, &used);
      if (env[used] != '\0') n = 0;
    } catch (const std::exception&) {
      n = 0;
    }
    if (n <= 0) throw std::invalid_argument(std::string("invalid CISCA_KIT_THREADS '") + env + "'");
  } else {
    n = static_cast<int>(std::thread::hardware_concurrency());
    if (n <= 0) n = 1;
  }
  omp_set_num_threads(n);
  return n;
}

int thread_count() { return omp_get_max_threads(); }

}  // namespace cisca
