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
#include <istream>
#include <map>
#include <string>
#include <vector>

namespace cisca::sampling {

struct ManifestRow {
  std::string image_id;
  std::vector<std::int64_t> counts;  // one per class
};

/// Per-image cell counts for each class.
struct DatasetManifest {
  std::vector<std::string> classes;
  std::vector<ManifestRow> rows;

  std::int64_t class_total(std::size_t cls) const;
  std::int64_t cell_total() const;
  void validate() const;
};

/// CSV with header `image_id,<class>,...` and one row per image.
DatasetManifest parse_manifest_csv(std::istream& in);

struct ClassPlan {
  std::string name;
  std::size_t index = 0;
  std::int64_t cells = 0;
  double alpha = 1.0;
  double beta = 0.0;
  std::int64_t n_extra = 0;
};

struct OversamplePlan {
  std::int64_t n_train = 0;
  std::int64_t cell_total = 0;
  std::size_t majority = 0;
  std::vector<ClassPlan> minority;  // manifest column order
  std::uint64_t seed = 0;

  std::int64_t total_extra() const;
  std::int64_t total_images() const { return n_train + total_extra(); }
};

/// n_extra_t = round(alpha_t * beta_t / max beta * N_train) with
/// beta_t = sqrt(C_train / C_t), for every class except the majority class.
/// Classes missing from `alphas` use alpha = 1.
OversamplePlan oversample_counts(const DatasetManifest& manifest,
                                 const std::map<std::string, double>& alphas);

/// Image row indices drawn with replacement, per minority class, with
/// probability proportional to that image's share of the class's cells.
/// One mt19937_64 stream seeded with `seed` is consumed class by class.
std::vector<std::vector<std::size_t>> sample_extra_images(const DatasetManifest& manifest,
                                                          const OversamplePlan& plan,
                                                          std::uint64_t seed);

/// ceil(n_train / n_batch * (image_height / 256)^2).
std::int64_t epoch_batch_count(std::int64_t n_train, std::int64_t n_batch,
                               std::int64_t image_height);

}  // namespace cisca::sampling
