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

#include "cisca/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "cisca/random.hpp"
#include "cisca/raster.hpp"

namespace cisca::sampling {

std::int64_t DatasetManifest::class_total(std::size_t cls) const {
  std::int64_t total = 0;
  for (const auto& row : rows) total += row.counts.at(cls);
  return total;
}

std::int64_t DatasetManifest::cell_total() const {
  std::int64_t total = 0;
  for (std::size_t k = 0; k < classes.size(); ++k) total += class_total(k);
  return total;
}

void DatasetManifest::validate() const {
  if (classes.empty()) throw DataError("manifest has no class columns");
  if (rows.empty()) throw DataError("manifest has no images");
  for (const auto& row : rows) {
    if (row.counts.size() != classes.size()) {
      throw DataError("manifest row '" + row.image_id + "' has " +
                      std::to_string(row.counts.size()) + " counts, expected " +
                      std::to_string(classes.size()));
    }
    for (auto c : row.counts) {
      if (c < 0) throw DataError("manifest row '" + row.image_id + "' has a negative count");
    }
  }
  if (cell_total() <= 0) throw DataError("manifest contains no cells");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

DatasetManifest parse_manifest_csv(std::istream& in) {
  DatasetManifest m;
  std::string line;
  if (!std::getline(in, line)) throw DataError("manifest is empty");
  auto header = split_csv_line(line);
  if (header.size() < 2) throw DataError("manifest header needs image_id and class columns");
  m.classes.assign(header.begin() + 1, header.end());
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw DataError("manifest line " + std::to_string(lineno) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(header.size()));
    }
    ManifestRow row;
    row.image_id = fields[0];
    for (std::size_t k = 1; k < fields.size(); ++k) {
      std::size_t used = 0;
      long long v = 0;
      try {
        v = std::stoll(fields[k], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != fields[k].size() || fields[k].empty()) {
        throw DataError("manifest line " + std::to_string(lineno) + ": '" + fields[k] +
                        "' is not an integer count");
      }
      row.counts.push_back(v);
    }
    m.rows.push_back(std::move(row));
  }
  m.validate();
  return m;
}

std::int64_t OversamplePlan::total_extra() const {
  std::int64_t total = 0;
  for (const auto& c : minority) total += c.n_extra;
  return total;
}

OversamplePlan oversample_counts(const DatasetManifest& manifest,
                                 const std::map<std::string, double>& alphas) {
  manifest.validate();
  for (const auto& [name, alpha] : alphas) {
    if (std::find(manifest.classes.begin(), manifest.classes.end(), name) ==
        manifest.classes.end()) {
      throw DataError("alpha given for unknown class '" + name + "'");
    }
    if (!(alpha >= 0.0)) throw DataError("alpha for class '" + name + "' must be >= 0");
  }

  OversamplePlan plan;
  plan.n_train = static_cast<std::int64_t>(manifest.rows.size());
  plan.cell_total = manifest.cell_total();
  std::vector<std::int64_t> totals;
  for (std::size_t k = 0; k < manifest.classes.size(); ++k) {
    totals.push_back(manifest.class_total(k));
  }
  plan.majority = static_cast<std::size_t>(
      std::max_element(totals.begin(), totals.end()) - totals.begin());

  double max_beta = 0.0;
  for (std::size_t k = 0; k < totals.size(); ++k) {
    if (k == plan.majority) continue;
    if (totals[k] == 0) {
      throw DataError("minority class '" + manifest.classes[k] +
                      "' has no cells; its sampling weight is undefined");
    }
    ClassPlan c;
    c.name = manifest.classes[k];
    c.index = k;
    c.cells = totals[k];
    const auto it = alphas.find(c.name);
    c.alpha = it == alphas.end() ? 1.0 : it->second;
    c.beta = std::sqrt(static_cast<double>(plan.cell_total) / static_cast<double>(totals[k]));
    max_beta = std::max(max_beta, c.beta);
    plan.minority.push_back(c);
  }
  for (auto& c : plan.minority) {
    c.n_extra = std::llround(c.alpha * (c.beta / max_beta) * static_cast<double>(plan.n_train));
  }
  return plan;
}

std::vector<std::vector<std::size_t>> sample_extra_images(const DatasetManifest& manifest,
                                                          const OversamplePlan& plan,
                                                          std::uint64_t seed) {
  manifest.validate();
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> out;
  for (const auto& c : plan.minority) {
    if (c.index >= manifest.classes.size()) throw DataError("plan does not match manifest");
    // Cumulative cell counts; draw u * total and locate its image.
    std::vector<std::int64_t> cumulative;
    std::int64_t total = 0;
    for (const auto& row : manifest.rows) {
      total += row.counts[c.index];
      cumulative.push_back(total);
    }
    std::vector<std::size_t> draws;
    if (c.n_extra > 0 && total == 0) {
      throw DataError("class '" + c.name + "' has no cells to sample from");
    }
    draws.reserve(static_cast<std::size_t>(c.n_extra));
    for (std::int64_t i = 0; i < c.n_extra; ++i) {
      const auto target = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(total)));
      const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
      draws.push_back(static_cast<std::size_t>(it - cumulative.begin()));
    }
    out.push_back(std::move(draws));
  }
  return out;
}

std::int64_t epoch_batch_count(std::int64_t n_train, std::int64_t n_batch,
                               std::int64_t image_height) {
  if (n_train <= 0 || n_batch <= 0) throw std::invalid_argument("n_train and n_batch must be positive");
  if (image_height < 256) throw std::invalid_argument("image height must be >= 256");
  // Exact integer ceiling of n_train * H^2 / (n_batch * 256^2).
  const std::int64_t num = n_train * image_height * image_height;
  const std::int64_t den = n_batch * 256 * 256;
  return (num + den - 1) / den;
}

}  // namespace cisca::sampling
