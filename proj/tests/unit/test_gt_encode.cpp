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

#include <cmath>

#include "doctest.h"

#include "cisca/grid.hpp"
#include "cisca/gt_encode.hpp"
#include "support/oracles.hpp"
#include "support/synth.hpp"

using namespace cisca;
using namespace cisca::gt;

namespace {

const MagProfile k20 = MagProfile::for_magnification(Magnification::k20x);

std::size_t count(const TernaryMap& t, std::uint8_t code) {
  return static_cast<std::size_t>(std::count(t.values().begin(), t.values().end(), code));
}

}  // namespace

TEST_CASE("well separated instances have no boundary class") {
  LabelMap m(20, 30, 1, 0);
  synth::paint_rect(m, 2, 2, 8, 8, 1);
  synth::paint_rect(m, 2, 14, 8, 20, 2);  // gap of 5 >= 2*1+3
  const auto t = ternary_from_labels(m, k20);
  CHECK(count(t, kBoundary) == 0);
  CHECK(count(t, kBody) == 98);
  CHECK(count(t, kBackground) == 600 - 98);

  LabelMap single(10, 10, 1, 0);
  synth::paint_disk(single, 5, 5, 3, 1);
  CHECK(count(ternary_from_labels(single, k20), kBoundary) == 0);
}

TEST_CASE("two squares with a one pixel gap get boundary on both facing edges") {
  LabelMap m(9, 13, 1, 0);
  synth::paint_rect(m, 2, 1, 6, 5, 1);
  synth::paint_rect(m, 2, 7, 6, 11, 2);
  const auto t = ternary_from_labels(m, k20);
  CHECK(t == oracle::ternary(m, 1, 1, 4));
  bool left = false, right = false;
  for (int r = 2; r <= 6; ++r) {
    left = left || t(r, 5) == kBoundary;
    right = right || t(r, 7) == kBoundary;
  }
  CHECK(left);
  CHECK(right);
}

TEST_CASE("ternary map matches the straight-line oracle on random scenes") {
  Rng rng(11);
  for (int i = 0; i < 60; ++i) {
    const auto m = synth::random_labels(rng, 8 + rng.below(20), 8 + rng.below(20), 5, 6);
    CHECK(ternary_from_labels(m, k20) == oracle::ternary(m, 1, 1, 4));
    TernaryOptions wide{StructuringElement::disk(2), StructuringElement::disk(1), 4};
    CHECK(ternary_from_labels(m, wide) == oracle::ternary(m, 2, 1, 4));
  }
}

TEST_CASE("distance maps: hand examples") {
  LabelMap line(1, 3, 1, 1);
  const auto d = distance_maps_from_labels(line);
  CHECK(d(0, 0, kHorizontal) == -1.0);
  CHECK(d(0, 1, kHorizontal) == 0.0);
  CHECK(d(0, 2, kHorizontal) == 1.0);
  for (int c = 0; c < 3; ++c) CHECK(d(0, c, kVertical) == 0.0);

  LabelMap dot(3, 3, 1, 0);
  dot(1, 1) = 4;
  const auto dd = distance_maps_from_labels(dot);
  for (std::size_t k = 0; k < kDistanceChannels; ++k) CHECK(dd(1, 1, k) == 0.0);

  LabelMap sq(3, 3, 1, 2);
  const auto ds = distance_maps_from_labels(sq);
  CHECK(ds(0, 0, kDiagonalDown) == -1.0);
  CHECK(ds(2, 2, kDiagonalDown) == 1.0);
  CHECK(ds(0, 2, kDiagonalDown) == 0.0);
  CHECK(ds(1, 1, kDiagonalDown) == 0.0);
  CHECK(ds(2, 0, kDiagonalDown) == 0.0);
  CHECK(ds(2, 0, kDiagonalUp) == -1.0);
  CHECK(ds(0, 2, kDiagonalUp) == 1.0);
}

TEST_CASE("distance maps: invariants on random label maps") {
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const auto m = synth::random_labels(rng, 4 + rng.below(28), 4 + rng.below(28), 6, 8);
    const auto d = distance_maps_from_labels(m);
    const auto n = static_cast<std::size_t>(max_label(m)) + 1;
    std::vector<std::array<double, 4>> lo(n), hi(n);
    for (auto& a : lo) a.fill(0.0);
    for (auto& a : hi) a.fill(0.0);
    bool ok = true;
    for (std::size_t p = 0; p < m.size(); ++p) {
      for (std::size_t k = 0; k < 4; ++k) {
        const double v = d[p * 4 + k];
        ok = ok && v >= -1.0 && v <= 1.0;
        if (m[p] == 0) ok = ok && v == 0.0;
        const auto id = static_cast<std::size_t>(m[p]);
        lo[id][k] = std::min(lo[id][k], v);
        hi[id][k] = std::max(hi[id][k], v);
      }
    }
    CHECK(ok);
    for (std::size_t id = 1; id < n; ++id) {
      for (std::size_t k = 0; k < 4; ++k) {
        const bool extremes = (lo[id][k] == -1.0 && hi[id][k] == 1.0) ||
                              (lo[id][k] == 0.0 && hi[id][k] == 0.0);
        CHECK(extremes);
      }
    }
  }
}

TEST_CASE("weight mask") {
  TernaryMap bg(4, 4, 1, kBackground);
  const auto wbg = weight_mask(bg, k20);
  for (auto v : wbg.values()) CHECK(v == kBackgroundWeight);
  TernaryMap cb(4, 4, 1, kBody);
  const auto wcb = weight_mask(cb, k20);
  for (auto v : wcb.values()) CHECK(v == 1.0);

  TernaryMap one(5, 5, 1, kBackground);
  one(2, 2) = kBody;
  const auto w = weight_mask(one, k20);
  double sum = 0.0;
  for (auto v : w.values()) sum += v;
  CHECK(sum == doctest::Approx(5 * 1.0 + 20 * 0.05));
  CHECK(w(1, 2) == 1.0);
  CHECK(w(1, 1) == kBackgroundWeight);
}

TEST_CASE("one-hot encoding") {
  TernaryMap px(1, 1, 1, kBoundary);
  const auto a = one_hot_ternary(px);
  CHECK(a[0] == 1.0);
  CHECK(a[1] == 0.0);
  CHECK(a[2] == 0.0);
  TernaryMap two(1, 2, 1, kBody);
  two(0, 1) = kBackground;
  const auto b = one_hot_ternary(two);
  CHECK(b.storage() == std::vector<double>{0, 1, 0, 0, 0, 1});

  Rng rng(2);
  TernaryMap r(7, 9, 1, 1);
  for (auto& v : r.storage()) v = static_cast<std::uint8_t>(1 + rng.below(3));
  auto back = argmax_channels(one_hot_ternary(r));
  for (auto& v : back.storage()) v = static_cast<std::uint8_t>(v + 1);
  CHECK(back == r);

  Raster<std::uint8_t> bad(1, 1, 1, 4);
  CHECK_THROWS_AS(one_hot(bad, 3), DataError);
  TernaryMap zero(1, 1, 1, 0);
  CHECK_THROWS_AS(one_hot_ternary(zero), DataError);
}
