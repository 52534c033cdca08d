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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cisca/raster.hpp"

namespace cisca::metrics {

struct MatchPair {
  std::int32_t gt = 0;
  std::int32_t pred = 0;
  double score = 0.0;  // IoU or centroid distance
};

/// One-to-one matching; pairs sorted by gt id, unmatched ids ascending.
struct MatchResult {
  std::vector<MatchPair> pairs;
  std::vector<std::int32_t> unmatched_gt;
  std::vector<std::int32_t> unmatched_pred;

  std::size_t tp() const { return pairs.size(); }
  std::size_t fp() const { return unmatched_pred.size(); }
  std::size_t fn() const { return unmatched_gt.size(); }
};

/// Binary Dice of the two foregrounds; both empty -> 1.
double dice_fg(const LabelMap& gt, const LabelMap& pred);

/// Aggregated Jaccard Index with greedy best-IoU matching in ascending GT id
/// order (ties to the lower pred id). Both maps empty -> 1.
double aji(const LabelMap& gt, const LabelMap& pred);

/// Optimal one-to-one matching of instance centroids: maximum number of
/// pairs within `radius`, then minimum total distance.
MatchResult match_by_centroid(const LabelMap& gt, const LabelMap& pred, double radius);

struct Detection {
  double p = 1.0;
  double r = 1.0;
  double f1 = 1.0;
};

/// Precision, recall and F1. Empty denominators give 1 (so empty-vs-empty is
/// (1, 1, 1) and an empty GT with predictions gives p = 0, r = 1, f1 = 0).
Detection prf1(std::size_t tp, std::size_t fp, std::size_t fn);
Detection prf1(const MatchResult& m);

/// All pairs with IoU strictly above `tau`. One-to-one for tau >= 0.5.
MatchResult match_by_iou(const LabelMap& gt, const LabelMap& pred, double tau = 0.5);

struct Panoptic {
  double dq = 1.0;
  double sq = 1.0;
  double pq = 1.0;
};

/// Pooled counts for PQ; partials from several images add up.
struct PqCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  double iou_sum = 0.0;

  PqCounts& operator+=(const PqCounts& o);
  bool empty() const { return tp == 0 && fp == 0 && fn == 0; }
  Panoptic quality() const;
};

PqCounts pq_counts(const MatchResult& iou_match);
Panoptic pq(const LabelMap& gt, const LabelMap& pred);

/// Instance id -> cell type (0 = unknown/background).
using TypeTable = std::map<std::int32_t, std::int32_t>;

/// Keeps only instances whose type is `cls`.
LabelMap restrict_to_class(const LabelMap& labels, const TypeTable& types, std::int32_t cls);

struct ImageRecord {
  std::string name;
  const LabelMap* gt = nullptr;
  const LabelMap* pred = nullptr;
  const TypeTable* gt_types = nullptr;
  const TypeTable* pred_types = nullptr;
  std::string tissue;  // grouping key for mPQ/bPQ; empty means one group
};

/// PQ+ for one class: counts pooled across images before the PQ formula.
/// Returns nullopt when the class never occurs in GT or predictions.
std::optional<double> pq_plus_per_class(std::span<const ImageRecord> images, std::int32_t cls);

struct PannukeScores {
  double mpq = 0.0;
  double bpq = 0.0;
};

/// Per-image class-averaged PQ (classes present in that image's GT) and
/// class-agnostic PQ, averaged per tissue and then across tissues.
PannukeScores mpq_pannuke(std::span<const ImageRecord> images,
                          std::span<const std::int32_t> classes);

enum class R2Mode {
  kOlsFit,    // 1 - RSS/TSS about the least-squares line of pred on true
  kIdentity,  // 1 - sum (pred - true)^2 / sum (true - mean)^2
};

/// Coefficient of determination between true and predicted counts. With no
/// variance in the true counts the result is 1 when predictions equal the
/// truth and 0 otherwise.
double r2_counts(std::span<const double> truth, std::span<const double> predicted,
                 R2Mode mode = R2Mode::kOlsFit);

struct ImageMetrics {
  std::string name;
  double dice = 0.0;
  double aji = 0.0;
  Detection detection;
  Panoptic panoptic;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t gt_count = 0;
  std::size_t pred_count = 0;
};

/// Per-image detection and segmentation scores.
ImageMetrics evaluate_image(const LabelMap& gt, const LabelMap& pred, double match_radius);

struct ClassMetrics {
  std::int32_t cls = 0;
  std::optional<double> pq_plus;
  std::optional<double> r2;
};

struct MetricsReport {
  std::vector<ImageMetrics> images;
  // Means of the per-image scores.
  double dice = 0.0;
  double aji = 0.0;
  double p = 0.0;
  double r = 0.0;
  double f1 = 0.0;
  double dq = 0.0;
  double sq = 0.0;
  double pq = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::vector<ClassMetrics> classes;
  std::optional<double> mpq_plus;
  std::optional<double> mpq;
  std::optional<double> bpq;
  /// Mean over classes, or the class-agnostic value without types.
  std::optional<double> r2;
};

struct EvalOptions {
  double match_radius = 6.0;
  /// Cell classes for the type-aware metrics; empty disables them.
  std::vector<std::int32_t> classes;
  R2Mode r2_mode = R2Mode::kOlsFit;
};

/// Full evaluation over a dataset; per-image work runs in parallel.
MetricsReport evaluate(std::span<const ImageRecord> images, const EvalOptions& opts);

namespace serial {

MetricsReport evaluate(std::span<const ImageRecord> images, const EvalOptions& opts);

}  // namespace serial

}  // namespace cisca::metrics
