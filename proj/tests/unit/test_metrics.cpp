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


#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "doctest.h"

#include "cisca/assignment.hpp"
#include "cisca/metrics.hpp"
#include "cisca/random.hpp"
#include "support/oracles.hpp"
#include "support/synth.hpp"

using namespace cisca;
using namespace cisca::metrics;

namespace {

LabelMap relabel(const LabelMap& m, Rng& rng) {
  std::int32_t maxid = 0;
  for (auto v : m.values()) maxid = std::max(maxid, v);
  std::vector<std::int32_t> perm(static_cast<std::size_t>(maxid) + 1);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = perm.size() - 1; i > 1; --i) std::swap(perm[i], perm[1 + rng.below(i)]);
  LabelMap out = m;
  for (auto& v : out.storage()) v = perm[static_cast<std::size_t>(v)] * 3;
  return out;
}

LabelMap from_rows(std::initializer_list<std::initializer_list<int>> rows) {
  const std::size_t h = rows.size();
  const std::size_t w = rows.begin()->size();
  LabelMap m(h, w, 1, 0);
  std::size_t r = 0;
  for (const auto& row : rows) {
    std::size_t c = 0;
    for (int v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

}  // namespace

TEST_CASE("dice_fg hand values") {
  LabelMap a(4, 4, 1, 0), b(4, 4, 1, 0);
  CHECK(dice_fg(a, b) == 1.0);
  synth::paint_rect(a, 0, 0, 0, 3, 1);
  synth::paint_rect(b, 0, 2, 1, 3, 5);
  CHECK(dice_fg(a, b) == doctest::Approx(0.5));
  LabelMap c(4, 4, 1, 0);
  synth::paint_rect(c, 3, 0, 3, 3, 2);
  CHECK(dice_fg(a, c) == 0.0);
  CHECK(dice_fg(a, a) == 1.0);
}

TEST_CASE("aji conventions") {
  LabelMap empty(8, 8, 1, 0), g(8, 8, 1, 0);
  synth::paint_rect(g, 1, 1, 3, 3, 1);
  synth::paint_rect(g, 5, 5, 6, 7, 2);
  CHECK(aji(empty, empty) == 1.0);
  CHECK(aji(g, empty) == 0.0);
  Rng rng(3);
  CHECK(aji(g, relabel(g, rng)) == 1.0);
}

TEST_CASE("aji on an 8x8 partial-overlap case matches the oracle") {
  const LabelMap g = from_rows({{1, 1, 1, 0, 0, 0, 0, 0},
                                {1, 1, 1, 0, 0, 0, 0, 0},
                                {1, 1, 1, 0, 2, 2, 2, 0},
                                {0, 0, 0, 0, 2, 2, 2, 0},
                                {0, 0, 0, 0, 2, 2, 2, 0},
                                {0, 0, 0, 0, 0, 0, 0, 0},
                                {0, 0, 0, 0, 0, 0, 0, 0},
                                {0, 0, 0, 0, 0, 0, 0, 0}});
  const LabelMap p = from_rows({{0, 0, 0, 0, 0, 0, 0, 0},
                                {0, 7, 7, 7, 0, 0, 0, 0},
                                {0, 7, 7, 7, 4, 4, 0, 0},
                                {0, 0, 0, 0, 4, 4, 0, 0},
                                {0, 0, 0, 0, 4, 4, 0, 0},
                                {0, 0, 0, 0, 4, 4, 0, 0},
                                {0, 0, 0, 0, 0, 0, 0, 0},
                                {0, 0, 0, 0, 0, 0, 0, 0}});
  CHECK(aji(g, p) == doctest::Approx(oracle::aji(g, p)).epsilon(1e-12));
  // GT1: in 4, union 9+6-4 = 11; GT2: in 6, union 9+8-6 = 11.
  CHECK(aji(g, p) == doctest::Approx(10.0 / 22.0));
}

TEST_CASE("aji, pq and centroid matching agree with oracles on random maps") {
  Rng rng(20260917);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t h = 4 + rng.below(13);
    const std::size_t w = 4 + rng.below(13);
    const LabelMap g = synth::random_labels(rng, h, w, 6, 5);
    const LabelMap p = synth::perturb_labels(rng, g, 5);
    CAPTURE(trial);
    CHECK(aji(g, p) == doctest::Approx(oracle::aji(g, p)).epsilon(1e-12));

    const auto want = oracle::pq(g, p);
    const auto got = pq(g, p);
    CHECK(got.dq == doctest::Approx(want.dq).epsilon(1e-12));
    CHECK(got.sq == doctest::Approx(want.sq).epsilon(1e-12));
    CHECK(got.pq == doctest::Approx(want.pq).epsilon(1e-12));

    const auto m = match_by_iou(g, p);
    const auto pairs = oracle::iou_pairs(g, p);
    REQUIRE(m.pairs.size() == pairs.size());
    std::set<std::int32_t> gs, ps;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      CHECK(m.pairs[i].gt == pairs[i].gt);
      CHECK(m.pairs[i].pred == pairs[i].pred);
      gs.insert(m.pairs[i].gt);
      ps.insert(m.pairs[i].pred);
    }
    CHECK(gs.size() == m.pairs.size());
    CHECK(ps.size() == m.pairs.size());

    const auto cm = match_by_centroid(g, p, 6.0);
    const auto oc = oracle::centroid_match(g, p, 6.0);
    CHECK(cm.tp() == oc.cardinality);
    double cost = 0.0;
    for (const auto& pr : cm.pairs) cost += pr.score;
    CHECK(cost == doctest::Approx(oc.cost).epsilon(1e-9));
    if (oc.optimal_count == 1) {
      auto want_pairs = oc.pairs;
      std::sort(want_pairs.begin(), want_pairs.end());
      REQUIRE(cm.pairs.size() == want_pairs.size());
      for (std::size_t i = 0; i < want_pairs.size(); ++i) {
        CHECK(cm.pairs[i].gt == want_pairs[i].first);
        CHECK(cm.pairs[i].pred == want_pairs[i].second);
      }
    }

    CHECK(aji(g, p) <= dice_fg(g, p) + 1e-12);
    const LabelMap g2 = relabel(g, rng);
    CHECK(aji(g2, p) == doctest::Approx(aji(g, p)));
    CHECK(pq(g2, p).pq == doctest::Approx(got.pq));
    CHECK(dice_fg(g2, p) == doctest::Approx(dice_fg(g, p)));
  }
}

TEST_CASE("centroid matching threshold and crossing candidates") {
  LabelMap g(20, 30, 1, 0), p(20, 30, 1, 0);
  synth::paint_rect(g, 5, 5, 7, 7, 1);
  synth::paint_rect(p, 5, 12, 7, 14, 1);
  CHECK(match_by_centroid(g, p, 6.0).tp() == 0);
  CHECK(match_by_centroid(g, p, 7.0).tp() == 1);
  const auto self = match_by_centroid(g, g, 6.0);
  REQUIRE(self.tp() == 1);
  CHECK(self.pairs[0].score == 0.0);

  // Greedy nearest-first would pair (2,12) and leave GT 1 unmatched.
  LabelMap g3(10, 40, 1, 0), p3(10, 40, 1, 0);
  synth::paint_rect(g3, 4, 4, 4, 4, 1);
  synth::paint_rect(g3, 4, 10, 4, 10, 2);
  synth::paint_rect(g3, 4, 20, 4, 20, 3);
  synth::paint_rect(p3, 4, 8, 4, 8, 11);
  synth::paint_rect(p3, 4, 14, 4, 14, 12);
  synth::paint_rect(p3, 4, 25, 4, 25, 13);
  const auto m = match_by_centroid(g3, p3, 6.0);
  const auto o = oracle::centroid_match(g3, p3, 6.0);
  CHECK(m.tp() == 3);
  CHECK(o.cardinality == 3);
  double cost = 0.0;
  for (const auto& pr : m.pairs) cost += pr.score;
  CHECK(cost == doctest::Approx(o.cost));
}

TEST_CASE("prf1 conventions") {
  const auto a = prf1(8, 2, 0);
  CHECK(a.p == doctest::Approx(0.8));
  CHECK(a.r == doctest::Approx(1.0));
  CHECK(a.f1 == doctest::Approx(8.0 / 9.0));
  const auto b = prf1(0, 0, 0);
  CHECK(b.p == 1.0);
  CHECK(b.r == 1.0);
  CHECK(b.f1 == 1.0);
  const auto c = prf1(0, 0, 3);
  CHECK(c.p == 1.0);
  CHECK(c.r == 0.0);
  CHECK(c.f1 == 0.0);
  const auto d = prf1(0, 4, 0);
  CHECK(d.p == 0.0);
  CHECK(d.r == 1.0);
  CHECK(d.f1 == 0.0);
  PqCounts k{5, 3, 2, 4.0};
  CHECK(prf1(5, 3, 2).f1 == doctest::Approx(k.quality().dq));
}

TEST_CASE("pq hand values") {
  LabelMap g(10, 10, 1, 0), p(10, 10, 1, 0);
  synth::paint_rect(g, 0, 0, 0, 4, 1);
  synth::paint_rect(p, 0, 0, 0, 2, 9);
  const auto a = pq(g, p);
  CHECK(a.dq == doctest::Approx(1.0));
  CHECK(a.sq == doctest::Approx(0.6));
  CHECK(a.pq == doctest::Approx(0.6));

  LabelMap g2(10, 10, 1, 0), p2(10, 10, 1, 0);
  synth::paint_rect(g2, 0, 0, 0, 4, 1);
  synth::paint_rect(g2, 5, 0, 5, 4, 2);
  synth::paint_rect(p2, 0, 0, 0, 3, 1);
  const auto b = pq(g2, p2);
  CHECK(b.dq == doctest::Approx(2.0 / 3.0));
  CHECK(b.sq == doctest::Approx(0.8));
  CHECK(b.pq == doctest::Approx(8.0 / 15.0));

  LabelMap g3(4, 4, 1, 0), p3(4, 4, 1, 0);
  synth::paint_rect(g3, 0, 0, 0, 3, 1);
  synth::paint_rect(p3, 0, 2, 0, 3, 1);
  synth::paint_rect(p3, 1, 0, 1, 1, 2);
  CHECK(match_by_iou(g3, p3).tp() == 0);

  const LabelMap e(10, 10, 1, 0);
  CHECK(pq(e, e).pq == 1.0);
  CHECK(pq(g, e).pq == 0.0);
}

TEST_CASE("pq+ pools counts across images") {
  // Image 1: one GT, two preds (TP IoU 0.8, one FP); image 2: two GT, one pred
  // (TP IoU 0.9, one FN). All instances are class 1.
  LabelMap g1(10, 10, 1, 0), p1(10, 10, 1, 0), g2(10, 10, 1, 0), p2(10, 10, 1, 0);
  synth::paint_rect(g1, 0, 0, 0, 4, 1);
  synth::paint_rect(p1, 0, 0, 0, 3, 1);
  synth::paint_rect(p1, 5, 5, 6, 6, 2);
  synth::paint_rect(g2, 0, 0, 0, 9, 1);
  synth::paint_rect(g2, 5, 0, 5, 3, 2);
  synth::paint_rect(p2, 0, 0, 0, 8, 1);
  const TypeTable t1{{1, 1}}, t2{{1, 1}, {2, 1}};
  const std::vector<ImageRecord> recs{{"a", &g1, &p1, &t1, &t2, "x"},
                                      {"b", &g2, &p2, &t2, &t1, "x"}};
  const auto v = pq_plus_per_class(recs, 1);
  REQUIRE(v.has_value());
  CHECK(*v == doctest::Approx(2.0 / 3.0 * 1.7 / 2.0));
  CHECK(*v == doctest::Approx(0.5667).epsilon(1e-4));
  CHECK_FALSE(pq_plus_per_class(recs, 2).has_value());

  EvalOptions opts;
  opts.classes = {1, 2};
  const auto report = evaluate(recs, opts);
  REQUIRE(report.mpq_plus.has_value());
  CHECK(*report.mpq_plus == doctest::Approx(*v));
}

TEST_CASE("mpq and bpq average per tissue first") {
  LabelMap g(10, 10, 1, 0);
  synth::paint_rect(g, 0, 0, 0, 4, 1);
  LabelMap p_perfect = g;
  LabelMap p_miss(10, 10, 1, 0);
  LabelMap g2(10, 10, 1, 0), p2(10, 10, 1, 0);
  synth::paint_rect(g2, 0, 0, 0, 4, 1);
  synth::paint_rect(g2, 5, 0, 5, 4, 2);
  synth::paint_rect(p2, 0, 0, 0, 3, 1);
  const TypeTable t{{1, 1}, {2, 1}};

  {
    const std::vector<ImageRecord> recs{{"a", &g, &p_perfect, &t, &t, "x"},
                                        {"b", &g2, &g2, &t, &t, "x"}};
    const std::vector<std::int32_t> classes{1};
    const auto s = mpq_pannuke(recs, classes);
    CHECK(s.mpq == doctest::Approx(1.0));
    CHECK(s.bpq == doctest::Approx(1.0));
  }
  {
    // Tissue x: two images with bPQ 1 and 0 -> 0.5; tissue y: one image 8/15.
    const std::vector<ImageRecord> recs{{"a", &g, &p_perfect, &t, &t, "x"},
                                        {"b", &g, &p_miss, &t, &t, "x"},
                                        {"c", &g2, &p2, &t, &t, "y"}};
    const std::vector<std::int32_t> none;
    const auto s = mpq_pannuke(recs, none);
    CHECK(s.bpq == doctest::Approx((0.5 + 8.0 / 15.0) / 2.0));
    CHECK(s.bpq != doctest::Approx((1.0 + 0.0 + 8.0 / 15.0) / 3.0));
  }
}

TEST_CASE("mpq matches a per-image oracle on a three-image toy set") {
  Rng rng(77);
  std::vector<LabelMap> gts, preds;
  std::vector<TypeTable> gtt, prt;
  for (int i = 0; i < 3; ++i) {
    gts.push_back(synth::random_labels(rng, 16, 16, 6, 5));
    preds.push_back(synth::perturb_labels(rng, gts.back(), 5));
    TypeTable a, b;
    for (std::int32_t id = 1; id <= 8; ++id) {
      a[id] = 1 + static_cast<std::int32_t>(rng.below(3));
      b[id] = rng.below(4) == 0 ? 1 + static_cast<std::int32_t>(rng.below(3)) : a[id];
    }
    gtt.push_back(a);
    prt.push_back(b);
  }
  // perturb_labels permutes ids; types follow the GT instance only loosely, which is fine.
  const std::vector<std::string> tissue{"x", "x", "y"};
  std::vector<ImageRecord> recs;
  for (int i = 0; i < 3; ++i) recs.push_back({"", &gts[i], &preds[i], &gtt[i], &prt[i], tissue[i]});
  const std::vector<std::int32_t> classes{1, 2, 3};
  const auto s = mpq_pannuke(recs, classes);

  std::map<std::string, std::vector<double>> mp, bp;
  for (int i = 0; i < 3; ++i) {
    bp[tissue[i]].push_back(oracle::pq(gts[i], preds[i]).pq);
    double sum = 0;
    int n = 0;
    for (auto cls : classes) {
      LabelMap g(16, 16, 1, 0), p(16, 16, 1, 0);
      for (std::size_t k = 0; k < g.size(); ++k) {
        if (gts[i][k] && gtt[i].at(gts[i][k]) == cls) g[k] = gts[i][k];
        if (preds[i][k] && prt[i].count(preds[i][k]) && prt[i].at(preds[i][k]) == cls) {
          p[k] = preds[i][k];
        }
      }
      if (oracle::pixel_sets(g).empty()) continue;
      sum += oracle::pq(g, p).pq;
      ++n;
    }
    if (n) mp[tissue[i]].push_back(sum / n);
  }
  auto two_level = [](const std::map<std::string, std::vector<double>>& m) {
    double t = 0;
    for (const auto& [k, v] : m) t += std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    return t / m.size();
  };
  CHECK(s.bpq == doctest::Approx(two_level(bp)));
  CHECK(s.mpq == doctest::Approx(two_level(mp)));
}

TEST_CASE("r2 conventions and oracle") {
  const std::vector<double> t{1, 4, 2, 8, 5};
  CHECK(r2_counts(t, t) == doctest::Approx(1.0));
  std::vector<double> aff;
  for (double x : t) aff.push_back(2 * x + 3);
  CHECK(r2_counts(t, aff) == doctest::Approx(1.0));
  CHECK(r2_counts(t, aff, R2Mode::kIdentity) < 0.0);
  const std::vector<double> c{3, 3, 3};
  CHECK(r2_counts(c, c) == 1.0);
  CHECK(r2_counts(c, std::vector<double>{3, 3, 4}) == 0.0);
  CHECK_THROWS_AS(r2_counts(t, c), std::invalid_argument);

  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + rng.below(10);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(rng.below(20));
      y[i] = x[i] + static_cast<double>(rng.below(7)) - 3.0;
    }
    x[0] = 0;
    x[1] = 19;
    double sy = 0;
    for (double v : y) sy += (v - y[0]) * (v - y[0]);
    if (sy == 0) continue;
    CHECK(r2_counts(x, y) == doctest::Approx(oracle::r2_ols(x, y)).epsilon(1e-9));
  }
}

TEST_CASE("parallel and serial evaluation agree and are order independent") {
  Rng rng(123);
  std::vector<LabelMap> gts, preds;
  std::vector<TypeTable> types;
  for (int i = 0; i < 12; ++i) {
    gts.push_back(synth::random_labels(rng, 24, 24, 6, 6));
    preds.push_back(synth::perturb_labels(rng, gts.back(), 6));
    TypeTable tt;
    for (std::int32_t id = 1; id <= 8; ++id) tt[id] = 1 + static_cast<std::int32_t>(id % 2);
    types.push_back(tt);
  }
  std::vector<ImageRecord> recs;
  for (int i = 0; i < 12; ++i) {
    recs.push_back({std::to_string(i), &gts[i], &preds[i], &types[i], &types[i], i % 3 ? "a" : "b"});
  }
  EvalOptions opts;
  opts.classes = {1, 2};
  const auto a = evaluate(recs, opts);
  const auto b = serial::evaluate(recs, opts);
  CHECK(a.pq == b.pq);
  CHECK(a.aji == b.aji);
  CHECK(a.f1 == b.f1);
  CHECK(*a.mpq_plus == *b.mpq_plus);
  CHECK(*a.mpq == *b.mpq);
  CHECK(*a.r2 == *b.r2);

  std::reverse(recs.begin(), recs.end());
  const auto c = evaluate(recs, opts);
  CHECK(c.pq == doctest::Approx(a.pq));
  CHECK(c.dice == doctest::Approx(a.dice));
  CHECK(*c.mpq_plus == doctest::Approx(*a.mpq_plus));

  const auto self = [&] {
    std::vector<ImageRecord> s;
    for (int i = 0; i < 12; ++i) s.push_back({"", &gts[i], &gts[i], &types[i], &types[i], "a"});
    return evaluate(s, opts);
  }();
  CHECK(self.pq == doctest::Approx(1.0));
  CHECK(self.aji == doctest::Approx(1.0));
  CHECK(self.f1 == doctest::Approx(1.0));
  CHECK(*self.mpq_plus == doctest::Approx(1.0));

  CHECK_THROWS_AS(evaluate(std::span<const ImageRecord>{}, opts), DataError);
}

TEST_CASE("assignment solver matches exhaustive minimum") {
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    CostMatrix m;
    m.rows = 1 + rng.below(5);
    m.cols = 1 + rng.below(5);
    m.cost.resize(m.rows * m.cols);
    for (auto& v : m.cost) v = rng.uniform(0.0, 10.0);
    const auto a = solve_assignment(m);
    REQUIRE(a.size() == m.rows);
    double got = 0.0;
    std::set<int> cols;
    std::size_t assigned = 0;
    for (std::size_t r = 0; r < m.rows; ++r) {
      if (a[r] < 0) continue;
      ++assigned;
      cols.insert(a[r]);
      got += m(r, static_cast<std::size_t>(a[r]));
    }
    CHECK(assigned == std::min(m.rows, m.cols));
    CHECK(cols.size() == assigned);
    // Exhaustive over column permutations.
    std::vector<int> perm(std::max(m.rows, m.cols));
    std::iota(perm.begin(), perm.end(), 0);
    double best = 1e300;
    do {
      double s = 0.0;
      for (std::size_t r = 0; r < m.rows; ++r) {
        const auto c = static_cast<std::size_t>(perm[r]);
        if (c < m.cols) s += m(r, c);
      }
      best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(got == doctest::Approx(best).epsilon(1e-9));
  }
}
