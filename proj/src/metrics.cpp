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

#include "cisca/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "cisca/assignment.hpp"
#include "cisca/grid.hpp"

namespace cisca::metrics {

namespace {

// Pixel areas of both maps and the sparse intersection table.
struct Overlaps {
  std::vector<std::int64_t> gt_area;
  std::vector<std::int64_t> pred_area;
  // Per GT id: (pred id, intersection) sorted by pred id.
  std::vector<std::vector<std::pair<std::int32_t, std::int64_t>>> by_gt;
};

Overlaps overlaps(const LabelMap& gt, const LabelMap& pred) {
  require_same_plane(gt, pred, "metrics");
  Overlaps o;
  o.gt_area = label_areas(gt);
  o.pred_area = label_areas(pred);
  o.by_gt.resize(o.gt_area.size());
  std::unordered_map<std::uint64_t, std::int64_t> inter;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const auto g = gt[i];
    const auto p = pred[i];
    if (g == 0 || p == 0) continue;
    ++inter[(static_cast<std::uint64_t>(g) << 32) | static_cast<std::uint32_t>(p)];
  }
  for (const auto& [key, count] : inter) {
    const auto g = static_cast<std::size_t>(key >> 32);
    const auto p = static_cast<std::int32_t>(key & 0xffffffffu);
    o.by_gt[g].emplace_back(p, count);
  }
  for (auto& row : o.by_gt) std::sort(row.begin(), row.end());
  return o;
}

std::vector<std::int32_t> present_ids(const std::vector<std::int64_t>& areas) {
  std::vector<std::int32_t> ids;
  for (std::size_t id = 1; id < areas.size(); ++id) {
    if (areas[id] > 0) ids.push_back(static_cast<std::int32_t>(id));
  }
  return ids;
}

void fill_unmatched(MatchResult& m, const std::vector<std::int64_t>& gt_area,
                    const std::vector<std::int64_t>& pred_area) {
  std::sort(m.pairs.begin(), m.pairs.end(),
            [](const MatchPair& a, const MatchPair& b) { return a.gt < b.gt; });
  std::vector<char> gt_used(gt_area.size(), 0), pred_used(pred_area.size(), 0);
  for (const auto& pr : m.pairs) {
    gt_used[static_cast<std::size_t>(pr.gt)] = 1;
    pred_used[static_cast<std::size_t>(pr.pred)] = 1;
  }
  for (auto id : present_ids(gt_area)) {
    if (!gt_used[static_cast<std::size_t>(id)]) m.unmatched_gt.push_back(id);
  }
  for (auto id : present_ids(pred_area)) {
    if (!pred_used[static_cast<std::size_t>(id)]) m.unmatched_pred.push_back(id);
  }
}

}  // namespace

double dice_fg(const LabelMap& gt, const LabelMap& pred) {
  require_same_plane(gt, pred, "dice_fg");
  std::int64_t a = 0, b = 0, both = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const bool x = gt[i] > 0;
    const bool y = pred[i] > 0;
    a += x;
    b += y;
    both += x && y;
  }
  if (a + b == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(a + b);
}

double aji(const LabelMap& gt, const LabelMap& pred) {
  const Overlaps o = overlaps(gt, pred);
  std::vector<char> used(o.pred_area.size(), 0);
  std::int64_t inter_sum = 0;
  std::int64_t union_sum = 0;
  for (std::size_t g = 1; g < o.gt_area.size(); ++g) {
    const std::int64_t ag = o.gt_area[g];
    if (ag == 0) continue;
    double best_iou = -1.0;
    std::int32_t best = 0;
    std::int64_t best_inter = 0, best_union = 0;
    for (const auto& [p, in] : o.by_gt[g]) {
      const std::int64_t un = ag + o.pred_area[static_cast<std::size_t>(p)] - in;
      const double iou = static_cast<double>(in) / static_cast<double>(un);
      if (iou > best_iou) {
        best_iou = iou;
        best = p;
        best_inter = in;
        best_union = un;
      }
    }
    if (best == 0) {
      union_sum += ag;
    } else {
      inter_sum += best_inter;
      union_sum += best_union;
      used[static_cast<std::size_t>(best)] = 1;
    }
  }
  for (std::size_t p = 1; p < o.pred_area.size(); ++p) {
    if (o.pred_area[p] > 0 && !used[p]) union_sum += o.pred_area[p];
  }
  if (union_sum == 0) return 1.0;
  return static_cast<double>(inter_sum) / static_cast<double>(union_sum);
}

MatchResult match_by_centroid(const LabelMap& gt, const LabelMap& pred, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("match radius must be positive");
  require_same_plane(gt, pred, "match_by_centroid");
  const auto gc = instance_centroids(gt);
  const auto pc = instance_centroids(pred);
  const std::size_t n = gc.size();
  const std::size_t m = pc.size();

  // Candidate edges and their connected components (union-find over
  // gt nodes [0, n) and pred nodes [n, n + m)).
  struct Edge {
    std::size_t g, p;
    double d;
  };
  std::vector<Edge> edges;
  std::vector<std::size_t> parent(n + m);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double d = std::hypot(gc[i].row - pc[j].row, gc[i].col - pc[j].col);
      if (d <= radius) {
        edges.push_back({i, j, d});
        parent[find(i)] = find(n + j);
      }
    }
  }

  std::unordered_map<std::size_t, std::vector<std::size_t>> comp_edges;
  for (std::size_t e = 0; e < edges.size(); ++e) comp_edges[find(edges[e].g)].push_back(e);

  // Each cost above `big` means "no edge". Using one more edge always beats
  // any distance saving, so the solver maximises cardinality first.
  MatchResult result;
  std::vector<std::size_t> roots;
  for (const auto& kv : comp_edges) roots.push_back(kv.first);
  std::sort(roots.begin(), roots.end());
  for (auto root : roots) {
    const auto& es = comp_edges[root];
    std::vector<std::size_t> gs, ps;
    for (auto e : es) {
      gs.push_back(edges[e].g);
      ps.push_back(edges[e].p);
    }
    std::sort(gs.begin(), gs.end());
    gs.erase(std::unique(gs.begin(), gs.end()), gs.end());
    std::sort(ps.begin(), ps.end());
    ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
    const double big = radius * static_cast<double>(std::min(gs.size(), ps.size()) + 1) + 1.0;
    CostMatrix cm{gs.size(), ps.size(), std::vector<double>(gs.size() * ps.size(), big)};
    std::vector<char> valid(gs.size() * ps.size(), 0);
    for (auto e : es) {
      const auto gi = static_cast<std::size_t>(
          std::lower_bound(gs.begin(), gs.end(), edges[e].g) - gs.begin());
      const auto pi = static_cast<std::size_t>(
          std::lower_bound(ps.begin(), ps.end(), edges[e].p) - ps.begin());
      cm.cost[gi * ps.size() + pi] = edges[e].d;
      valid[gi * ps.size() + pi] = 1;
    }
    const auto assign = solve_assignment(cm);
    for (std::size_t gi = 0; gi < gs.size(); ++gi) {
      const int pi = assign[gi];
      if (pi < 0 || !valid[gi * ps.size() + static_cast<std::size_t>(pi)]) continue;
      result.pairs.push_back({gc[gs[gi]].id, pc[ps[static_cast<std::size_t>(pi)]].id,
                              cm.cost[gi * ps.size() + static_cast<std::size_t>(pi)]});
    }
  }
  fill_unmatched(result, label_areas(gt), label_areas(pred));
  return result;
}

Detection prf1(std::size_t tp, std::size_t fp, std::size_t fn) {
  Detection d;
  const auto t = static_cast<double>(tp);
  if (tp + fp > 0) d.p = t / static_cast<double>(tp + fp);
  if (tp + fn > 0) d.r = t / static_cast<double>(tp + fn);
  if (tp + fp + fn > 0) d.f1 = t / (t + 0.5 * static_cast<double>(fp + fn));
  return d;
}

Detection prf1(const MatchResult& m) { return prf1(m.tp(), m.fp(), m.fn()); }

MatchResult match_by_iou(const LabelMap& gt, const LabelMap& pred, double tau) {
  if (!(tau >= 0.5 && tau < 1.0)) {
    throw std::invalid_argument("IoU threshold must lie in [0.5, 1) for one-to-one matching");
  }
  const Overlaps o = overlaps(gt, pred);
  MatchResult result;
  for (std::size_t g = 1; g < o.by_gt.size(); ++g) {
    for (const auto& [p, in] : o.by_gt[g]) {
      const std::int64_t un = o.gt_area[g] + o.pred_area[static_cast<std::size_t>(p)] - in;
      // tau * un is exact for tau = 0.5, so the boundary case is strict.
      if (static_cast<double>(in) > tau * static_cast<double>(un)) {
        result.pairs.push_back({static_cast<std::int32_t>(g), p,
                                static_cast<double>(in) / static_cast<double>(un)});
      }
    }
  }
  fill_unmatched(result, o.gt_area, o.pred_area);
  return result;
}

PqCounts& PqCounts::operator+=(const PqCounts& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  iou_sum += o.iou_sum;
  return *this;
}

Panoptic PqCounts::quality() const {
  if (empty()) return {1.0, 1.0, 1.0};
  if (tp == 0) return {0.0, 0.0, 0.0};
  Panoptic q;
  const auto t = static_cast<double>(tp);
  q.dq = t / (t + 0.5 * static_cast<double>(fp + fn));
  q.sq = iou_sum / t;
  q.pq = q.dq * q.sq;
  return q;
}

PqCounts pq_counts(const MatchResult& m) {
  PqCounts c;
  c.tp = static_cast<std::int64_t>(m.tp());
  c.fp = static_cast<std::int64_t>(m.fp());
  c.fn = static_cast<std::int64_t>(m.fn());
  for (const auto& pr : m.pairs) c.iou_sum += pr.score;
  return c;
}

Panoptic pq(const LabelMap& gt, const LabelMap& pred) {
  return pq_counts(match_by_iou(gt, pred)).quality();
}

LabelMap restrict_to_class(const LabelMap& labels, const TypeTable& types, std::int32_t cls) {
  LabelMap out(labels.height(), labels.width(), 1, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto id = labels[i];
    if (id == 0) continue;
    const auto it = types.find(id);
    if (it != types.end() && it->second == cls) out[i] = id;
  }
  return out;
}

namespace {

void require_types(const ImageRecord& rec) {
  if (!rec.gt || !rec.pred) throw std::invalid_argument("image record without label maps");
  if (!rec.gt_types || !rec.pred_types) {
    throw DataError("image '" + rec.name + "' is missing a type table");
  }
}

bool has_instances(const LabelMap& labels) {
  return std::any_of(labels.values().begin(), labels.values().end(),
                     [](std::int32_t v) { return v > 0; });
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

std::optional<double> pq_plus_per_class(std::span<const ImageRecord> images, std::int32_t cls) {
  PqCounts pooled;
  for (const auto& rec : images) {
    require_types(rec);
    const LabelMap g = restrict_to_class(*rec.gt, *rec.gt_types, cls);
    const LabelMap p = restrict_to_class(*rec.pred, *rec.pred_types, cls);
    pooled += pq_counts(match_by_iou(g, p));
  }
  if (pooled.empty()) return std::nullopt;
  return pooled.quality().pq;
}

PannukeScores mpq_pannuke(std::span<const ImageRecord> images,
                          std::span<const std::int32_t> classes) {
  std::map<std::string, std::vector<double>> mpq_by_tissue, bpq_by_tissue;
  for (const auto& rec : images) {
    if (!rec.gt || !rec.pred) throw std::invalid_argument("image record without label maps");
    bpq_by_tissue[rec.tissue].push_back(pq(*rec.gt, *rec.pred).pq);
    if (classes.empty()) continue;
    require_types(rec);
    std::vector<double> per_class;
    for (auto cls : classes) {
      const LabelMap g = restrict_to_class(*rec.gt, *rec.gt_types, cls);
      if (!has_instances(g)) continue;
      const LabelMap p = restrict_to_class(*rec.pred, *rec.pred_types, cls);
      per_class.push_back(pq(g, p).pq);
    }
    if (!per_class.empty()) mpq_by_tissue[rec.tissue].push_back(mean(per_class));
  }
  auto tissue_mean = [](const std::map<std::string, std::vector<double>>& groups) {
    std::vector<double> means;
    for (const auto& [tissue, values] : groups) {
      if (!values.empty()) means.push_back(mean(values));
    }
    return means.empty() ? 0.0 : mean(means);
  };
  return {tissue_mean(mpq_by_tissue), tissue_mean(bpq_by_tissue)};
}

double r2_counts(std::span<const double> truth, std::span<const double> predicted,
                 R2Mode mode) {
  if (truth.size() != predicted.size()) {
    throw std::invalid_argument("r2_counts: true and predicted count vectors differ in length");
  }
  if (truth.empty()) throw std::invalid_argument("r2_counts: no observations");
  const auto n = static_cast<double>(truth.size());
  const double mx = std::accumulate(truth.begin(), truth.end(), 0.0) / n;
  const double my = std::accumulate(predicted.begin(), predicted.end(), 0.0) / n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double dx = truth[i] - mx;
    const double dy = predicted[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0) {
    return std::equal(truth.begin(), truth.end(), predicted.begin()) ? 1.0 : 0.0;
  }
  if (mode == R2Mode::kIdentity) {
    double rss = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const double e = predicted[i] - truth[i];
      rss += e * e;
    }
    return 1.0 - rss / sxx;
  }
  if (syy == 0.0) return 0.0;
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double e = predicted[i] - (intercept + slope * truth[i]);
    rss += e * e;
  }
  return 1.0 - rss / syy;
}

ImageMetrics evaluate_image(const LabelMap& gt, const LabelMap& pred, double match_radius) {
  ImageMetrics m;
  m.dice = dice_fg(gt, pred);
  m.aji = aji(gt, pred);
  const MatchResult centroid = match_by_centroid(gt, pred, match_radius);
  m.detection = prf1(centroid);
  m.tp = centroid.tp();
  m.fp = centroid.fp();
  m.fn = centroid.fn();
  m.gt_count = centroid.tp() + centroid.fn();
  m.pred_count = centroid.tp() + centroid.fp();
  m.panoptic = pq(gt, pred);
  return m;
}

namespace {

std::size_t count_class(const LabelMap& labels, const TypeTable& types, std::int32_t cls) {
  std::set<std::int32_t> ids;
  for (auto v : labels.values()) {
    if (v == 0) continue;
    const auto it = types.find(v);
    if (it != types.end() && it->second == cls) ids.insert(v);
  }
  return ids.size();
}

void aggregate(MetricsReport& report, std::span<const ImageRecord> images,
               const EvalOptions& opts) {
  const auto n = static_cast<double>(report.images.size());
  for (const auto& im : report.images) {
    report.dice += im.dice / n;
    report.aji += im.aji / n;
    report.p += im.detection.p / n;
    report.r += im.detection.r / n;
    report.f1 += im.detection.f1 / n;
    report.dq += im.panoptic.dq / n;
    report.sq += im.panoptic.sq / n;
    report.pq += im.panoptic.pq / n;
    report.tp += im.tp;
    report.fp += im.fp;
    report.fn += im.fn;
  }

  const auto scores = mpq_pannuke(images, opts.classes);
  report.bpq = scores.bpq;

  if (opts.classes.empty()) {
    std::vector<double> t, p;
    for (const auto& im : report.images) {
      t.push_back(static_cast<double>(im.gt_count));
      p.push_back(static_cast<double>(im.pred_count));
    }
    if (!t.empty()) report.r2 = r2_counts(t, p, opts.r2_mode);
    return;
  }

  report.mpq = scores.mpq;
  std::vector<double> pq_plus, r2s;
  for (auto cls : opts.classes) {
    ClassMetrics cm;
    cm.cls = cls;
    cm.pq_plus = pq_plus_per_class(images, cls);
    std::vector<double> t, p;
    for (const auto& rec : images) {
      t.push_back(static_cast<double>(count_class(*rec.gt, *rec.gt_types, cls)));
      p.push_back(static_cast<double>(count_class(*rec.pred, *rec.pred_types, cls)));
    }
    cm.r2 = r2_counts(t, p, opts.r2_mode);
    if (cm.pq_plus) pq_plus.push_back(*cm.pq_plus);
    r2s.push_back(*cm.r2);
    report.classes.push_back(cm);
  }
  if (!pq_plus.empty()) report.mpq_plus = mean(pq_plus);
  if (!r2s.empty()) report.r2 = mean(r2s);
}

void check_records(std::span<const ImageRecord> images) {
  if (images.empty()) throw DataError("no images to evaluate");
  for (const auto& rec : images) {
    if (!rec.gt || !rec.pred) throw std::invalid_argument("image record without label maps");
    require_same_plane(*rec.gt, *rec.pred, rec.name.c_str());
  }
}

}  // namespace

MetricsReport evaluate(std::span<const ImageRecord> images, const EvalOptions& opts) {
  check_records(images);
  MetricsReport report;
  report.images.resize(images.size());
  const auto count = static_cast<std::ptrdiff_t>(images.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const auto& rec = images[static_cast<std::size_t>(i)];
    ImageMetrics m = evaluate_image(*rec.gt, *rec.pred, opts.match_radius);
    m.name = rec.name;
    report.images[static_cast<std::size_t>(i)] = std::move(m);
  }
  aggregate(report, images, opts);
  return report;
}

namespace serial {

MetricsReport evaluate(std::span<const ImageRecord> images, const EvalOptions& opts) {
  check_records(images);
  MetricsReport report;
  for (const auto& rec : images) {
    ImageMetrics m = evaluate_image(*rec.gt, *rec.pred, opts.match_radius);
    m.name = rec.name;
    report.images.push_back(std::move(m));
  }
  aggregate(report, images, opts);
  return report;
}

}  // namespace serial

}  // namespace cisca::metrics
