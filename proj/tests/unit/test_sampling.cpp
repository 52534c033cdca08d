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
#include <sstream>

#include "doctest.h"

#include "cisca/raster.hpp"
#include "cisca/sampling.hpp"
#include "support/conic.hpp"

using namespace cisca;
using namespace cisca::sampling;

namespace {

DatasetManifest two_images(std::int64_t a, std::int64_t b) {
  DatasetManifest m;
  m.classes = {"major", "minor"};
  m.rows = {{"a", {100, a}}, {"b", {100, b}}};
  return m;
}

}  // namespace

TEST_CASE("conic totals reproduce the published image count") {
  const auto m = synth::conic_manifest();
  CHECK(m.rows.size() == 3589u);
  CHECK(m.cell_total() == 412456);
  const auto plan = oversample_counts(m, synth::conic_alphas());
  CHECK(plan.n_train == 3589);
  CHECK(plan.minority.size() == 5u);
  CHECK(m.classes[plan.majority] == "epithelial");

  // Direct evaluation of the formula.
  double max_beta = 0.0;
  for (auto c : synth::kConicCounts) max_beta = std::max(max_beta, std::sqrt(412456.0 / c));
  std::int64_t want = 0;
  for (std::size_t c = 0; c < 6; ++c) {
    if (c == 1) continue;
    const double alpha = (c == 0 || c == 4) ? 1.6 : 0.9;
    want += std::llround(alpha * std::sqrt(412456.0 / synth::kConicCounts[c]) / max_beta * 3589);
  }
  CHECK(plan.total_extra() == want);
  CHECK(std::abs(plan.total_images() - 16690) <= 10);
  for (const auto& cp : plan.minority) {
    if (cp.name == "eosinophil") CHECK(cp.n_extra == std::llround(1.6 * 3589));
  }
}

TEST_CASE("balanced classes and zero alpha") {
  DatasetManifest m;
  m.classes = {"x", "y", "z"};
  m.rows = {{"a", {50, 10, 10}}, {"b", {50, 10, 10}}, {"c", {0, 5, 5}}};
  const auto plan = oversample_counts(m, {});
  REQUIRE(plan.minority.size() == 2u);
  CHECK(plan.minority[0].beta == doctest::Approx(plan.minority[1].beta));
  CHECK(plan.minority[0].n_extra == 3);
  CHECK(plan.minority[1].n_extra == 3);
  const auto zero = oversample_counts(m, {{"y", 0.0}});
  CHECK(zero.minority[0].n_extra == 0);
  CHECK(zero.minority[1].n_extra == 3);
}

TEST_CASE("n_extra grows with alpha and rarity") {
  DatasetManifest m;
  m.classes = {"big", "mid", "rare"};
  m.rows = {{"a", {1000, 100, 10}}, {"b", {1000, 100, 5}}};
  const auto p = oversample_counts(m, {});
  CHECK(p.minority[0].n_extra <= p.minority[1].n_extra);
  const auto q = oversample_counts(m, {{"mid", 1.5}});
  CHECK(q.minority[0].n_extra >= p.minority[0].n_extra);
}

TEST_CASE("empty minority class is rejected") {
  CHECK_THROWS_AS(oversample_counts(two_images(0, 0), {}), DataError);
  DatasetManifest neg = two_images(1, 1);
  neg.rows[0].counts[1] = -1;
  CHECK_THROWS_AS(neg.validate(), DataError);
}

TEST_CASE("sampling draws proportionally and deterministically") {
  {
    const auto m = two_images(40, 0);
    auto plan = oversample_counts(m, {});
    plan.minority[0].n_extra = 500;
    const auto s = sample_extra_images(m, plan, 1);
    REQUIRE(s.size() == 1u);
    CHECK(s[0].size() == 500u);
    for (auto i : s[0]) CHECK(i == 0u);
  }
  const auto m = two_images(75, 25);
  auto plan = oversample_counts(m, {});
  plan.minority[0].n_extra = 100000;
  const auto s = sample_extra_images(m, plan, 42);
  std::size_t first = 0;
  for (auto i : s[0]) first += i == 0;
  CHECK(std::abs(static_cast<double>(first) / 1e5 - 0.75) < 0.01);
  CHECK(sample_extra_images(m, plan, 42) == s);
  CHECK(sample_extra_images(m, plan, 43) != s);
}

TEST_CASE("epoch batch count") {
  CHECK(epoch_batch_count(16690, 4, 256) == 4173);
  CHECK(epoch_batch_count(16690, 4, 1024) == 16 * 16690 / 4 + (16 * 16690 % 4 ? 1 : 0));
  CHECK(epoch_batch_count(16688, 4, 1024) == 16 * epoch_batch_count(16688, 4, 256));
  CHECK(epoch_batch_count(4, 4, 256) == 1);
  CHECK_THROWS(epoch_batch_count(4, 0, 256));
}

TEST_CASE("manifest csv parsing") {
  std::istringstream ok("image_id,a,b\nx,1,2\ny,3,0\n");
  const auto m = parse_manifest_csv(ok);
  CHECK(m.classes == std::vector<std::string>{"a", "b"});
  CHECK(m.rows.size() == 2u);
  CHECK(m.class_total(0) == 4);
  std::istringstream bad("image_id,a,b\nx,1\n");
  CHECK_THROWS_AS(parse_manifest_csv(bad), DataError);
  std::istringstream junk("image_id,a\nx,abc\n");
  CHECK_THROWS_AS(parse_manifest_csv(junk), DataError);
}
