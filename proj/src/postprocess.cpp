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

#include "cisca/postprocess.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>

namespace cisca::post {

PostprocessConfig PostprocessConfig::for_profile(const MagProfile& profile) {
  PostprocessConfig cfg;
  cfg.profile = profile;
  cfg.theta2 = profile.min_instance_area;
  return cfg;
}

void PostprocessConfig::validate() const {
  if (!(theta1 > 0.0 && theta1 < 1.0)) {
    throw std::invalid_argument("theta1 must lie in (0, 1)");
  }
  if (theta2 < 0) throw std::invalid_argument("theta2 must be non-negative");
}

void normalize_min_max(Tensor& t, std::size_t channel) {
  const std::size_t ch = t.channels();
  const auto n = static_cast<std::ptrdiff_t>(t.pixels());
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
#pragma omp parallel for reduction(min : lo) reduction(max : hi) schedule(static)
  for (std::ptrdiff_t p = 0; p < n; ++p) {
    const double v = t[static_cast<std::size_t>(p) * ch + channel];
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double span = hi - lo;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < n; ++p) {
    double& v = t[static_cast<std::size_t>(p) * ch + channel];
    v = span > 0.0 ? (v - lo) / span : 0.0;
  }
}

namespace {

void require_dist(const Tensor& dist, const SobelBank& bank) {
  if (dist.channels() != bank.kernels.size()) {
    throw DataError("distance tensor must have 4 channels, got " +
                    std::to_string(dist.channels()));
  }
}

}  // namespace

Tensor edge_strength(const Tensor& dist, const SobelBank& bank) {
  require_dist(dist, bank);
  Tensor norm = dist;
  for (std::size_t k = 0; k < norm.channels(); ++k) normalize_min_max(norm, k);
  Tensor strength(dist.height(), dist.width(), 1, 0.0);
  const auto n = static_cast<std::ptrdiff_t>(dist.pixels());
  for (std::size_t k = 0; k < norm.channels(); ++k) {
    Tensor resp = correlate5(norm, k, bank.kernels[k]);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t p = 0; p < n; ++p) resp[static_cast<std::size_t>(p)] *= -1.0;
    normalize_min_max(resp, 0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t p = 0; p < n; ++p) {
      const auto i = static_cast<std::size_t>(p);
      strength[i] = std::max(strength[i], resp[i]);
    }
  }
  return strength;
}

Mask edge_mask(const Tensor& dist, const SobelBank& bank, double theta1) {
  const Tensor strength = edge_strength(dist, bank);
  Mask out(dist.height(), dist.width(), 1, 0);
  for (std::size_t i = 0; i < strength.size(); ++i) out[i] = strength[i] > theta1 ? 1 : 0;
  return out;
}

namespace {

void require_prob3(const Tensor& prob) {
  if (prob.channels() != 3) {
    throw DataError("pixel-class probabilities must have 3 channels (BD, CB, BG), got " +
                    std::to_string(prob.channels()));
  }
}

}  // namespace

Mask foreground_mask(const Tensor& prob) {
  require_prob3(prob);
  Mask out(prob.height(), prob.width(), 1, 0);
  for (std::size_t p = 0; p < prob.pixels(); ++p) {
    out[p] = prob[p * 3] + prob[p * 3 + 1] > prob[p * 3 + 2] ? 1 : 0;
  }
  return out;
}

Mask marker_mask(const Tensor& prob, const Mask& edges) {
  require_prob3(prob);
  require_same_plane(prob, edges, "marker_mask");
  Mask out(prob.height(), prob.width(), 1, 0);
  for (std::size_t p = 0; p < prob.pixels(); ++p) {
    const double bd = prob[p * 3];
    const double cb = prob[p * 3 + 1];
    const double bg = prob[p * 3 + 2];
    out[p] = (cb > bd && cb > bg && !edges[p]) ? 1 : 0;
  }
  return out;
}

Tensor topographic_map(const Tensor& prob, const Mask& fg, const Mask& edges) {
  require_prob3(prob);
  require_same_plane(prob, fg, "topographic_map");
  require_same_plane(prob, edges, "topographic_map");
  Tensor out(prob.height(), prob.width(), 1, 0.0);
  for (std::size_t p = 0; p < prob.pixels(); ++p) {
    const double inner = (fg[p] && !edges[p]) ? 1.0 : 0.0;
    out[p] = (1.0 - prob[p * 3 + 1]) + (1.0 - inner);
  }
  return out;
}

LabelMap watershed(const Tensor& topo, const LabelMap& markers, const Mask& region) {
  require_same_plane(topo, markers, "watershed");
  require_same_plane(topo, region, "watershed");
  const auto h = static_cast<int>(topo.height());
  const auto w = static_cast<int>(topo.width());

  struct Entry {
    double height;
    std::uint64_t age;
    int index;
    bool operator>(const Entry& o) const {
      return height != o.height ? height > o.height : age > o.age;
    }
  };
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;

  LabelMap out(topo.height(), topo.width(), 1, 0);
  std::uint64_t age = 0;
  for (int i = 0; i < h * w; ++i) {
    const auto p = static_cast<std::size_t>(i);
    if (markers[p] > 0 && region[p]) {
      out[p] = markers[p];
      queue.push({topo[p], age++, i});
    }
  }
  while (!queue.empty()) {
    const Entry e = queue.top();
    queue.pop();
    const int r = e.index / w;
    const int c = e.index % w;
    const auto label = out[static_cast<std::size_t>(e.index)];
    for (int dr = -1; dr <= 1; ++dr) {
      const int nr = r + dr;
      if (nr < 0 || nr >= h) continue;
      for (int dc = -1; dc <= 1; ++dc) {
        const int nc = c + dc;
        if ((dr == 0 && dc == 0) || nc < 0 || nc >= w) continue;
        const auto q = static_cast<std::size_t>(nr * w + nc);
        if (!region[q] || out[q] != 0) continue;
        out[q] = label;
        queue.push({topo[q], age++, nr * w + nc});
      }
    }
  }
  return out;
}

InstanceTypeTable assign_types(const LabelMap& labels, const Tensor& type_prob) {
  require_same_plane(labels, type_prob, "assign_types");
  const std::size_t ch = type_prob.channels();
  if (ch < 2) throw DataError("type map needs a background channel plus at least one type");
  const auto n = static_cast<std::size_t>(max_label(labels)) + 1;
  std::vector<std::vector<std::int64_t>> votes(n, std::vector<std::int64_t>(ch, 0));
  std::vector<std::vector<double>> prob_sum(n, std::vector<double>(ch, 0.0));
  std::vector<std::int64_t> area(n, 0);
  for (std::size_t p = 0; p < labels.pixels(); ++p) {
    const auto id = static_cast<std::size_t>(labels[p]);
    if (id == 0) continue;
    ++area[id];
    std::size_t best = 0;
    for (std::size_t k = 0; k < ch; ++k) {
      const double v = type_prob[p * ch + k];
      prob_sum[id][k] += v;
      if (v > type_prob[p * ch + best]) best = k;
    }
    ++votes[id][best];
  }

  InstanceTypeTable table;
  for (std::size_t id = 1; id < n; ++id) {
    if (area[id] == 0) continue;
    std::size_t winner = 1;
    for (std::size_t k = 2; k < ch; ++k) {
      if (votes[id][k] > votes[id][winner]) winner = k;
    }
    double fraction = 0.0;
    if (votes[id][winner] > 0) {
      fraction = static_cast<double>(votes[id][winner]) / static_cast<double>(area[id]);
    } else {
      winner = 1;
      for (std::size_t k = 2; k < ch; ++k) {
        if (prob_sum[id][k] > prob_sum[id][winner]) winner = k;
      }
      fraction = prob_sum[id][winner] / static_cast<double>(area[id]);
    }
    table.push_back({static_cast<std::int32_t>(id), static_cast<std::int32_t>(winner),
                     fraction});
  }
  return table;
}

PostprocessResult postprocess(const Tensor& prob, const Tensor& dist,
                              const Tensor* type_prob, const PostprocessConfig& cfg) {
  cfg.validate();
  require_prob3(prob);
  require_same_plane(prob, dist, "postprocess");
  if (type_prob) require_same_plane(prob, *type_prob, "postprocess");

  const SobelBank bank = sobel_bank();
  const Mask fg = foreground_mask(prob);
  const Mask edges = edge_mask(dist, bank, cfg.theta1);
  const LabelMap markers = connected_components(marker_mask(prob, edges));
  const Tensor topo = topographic_map(prob, fg, edges);

  PostprocessResult result;
  result.labels = remove_small_instances(watershed(topo, markers, fg), cfg.theta2);
  if (type_prob) result.types = assign_types(result.labels, *type_prob);
  return result;
}

namespace serial {

Tensor edge_strength(const Tensor& dist, const SobelBank& bank) {
  require_dist(dist, bank);
  const std::size_t ch = dist.channels();
  Tensor strength(dist.height(), dist.width(), 1, 0.0);
  auto rescale = [](std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const double a = *lo, span = *hi - *lo;
    for (double& x : v) x = span > 0.0 ? (x - a) / span : 0.0;
  };
  for (std::size_t k = 0; k < ch; ++k) {
    std::vector<double> plane(dist.pixels());
    for (std::size_t p = 0; p < plane.size(); ++p) plane[p] = dist[p * ch + k];
    rescale(plane);
    Tensor single(dist.height(), dist.width(), 1, plane);
    const Tensor resp = cisca::post::serial::correlate5(single, 0, bank.kernels[k]);
    std::vector<double> neg(resp.size());
    for (std::size_t p = 0; p < neg.size(); ++p) neg[p] = -resp[p];
    rescale(neg);
    for (std::size_t p = 0; p < neg.size(); ++p) strength[p] = std::max(strength[p], neg[p]);
  }
  return strength;
}

}  // namespace serial

}  // namespace cisca::post
