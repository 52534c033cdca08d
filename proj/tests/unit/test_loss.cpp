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
#include <numbers>

#include "doctest.h"

#include "cisca/loss.hpp"
#include "cisca/random.hpp"
#include "cisca/sobel.hpp"
#include "support/oracles.hpp"

using namespace cisca;
using namespace cisca::loss;

namespace {

constexpr double kTol = 1e-6;

Tensor make(std::size_t h, std::size_t w, std::size_t c, std::vector<double> v) {
  return Tensor(h, w, c, std::move(v));
}

Tensor random_prob(Rng& rng, std::size_t h, std::size_t w, std::size_t c) {
  Tensor t(h, w, c, 0.0);
  for (std::size_t p = 0; p < t.pixels(); ++p) {
    double s = 0.0;
    for (std::size_t k = 0; k < c; ++k) s += t[p * c + k] = 0.05 + rng.uniform();
    for (std::size_t k = 0; k < c; ++k) t[p * c + k] /= s;
  }
  return t;
}

Tensor random_one_hot(Rng& rng, std::size_t h, std::size_t w, std::size_t c) {
  Tensor t(h, w, c, 0.0);
  for (std::size_t p = 0; p < t.pixels(); ++p) t[p * c + rng.below(c)] = 1.0;
  return t;
}

Tensor random_field(Rng& rng, std::size_t h, std::size_t w, std::size_t c) {
  Tensor t(h, w, c, 0.0);
  for (auto& v : t.storage()) v = rng.uniform(-1.0, 1.0);
  return t;
}

// Direct evaluation of the Tversky term for one (y, yhat) pair.
double tversky_term(double y, double q, double a, double eps) {
  return 1.0 - (y * q + eps) / (y * q + a * y * (1 - q) + (1 - a) * (1 - y) * q + eps);
}

}  // namespace

TEST_CASE("cross-entropy hand values") {
  const auto gt = make(1, 1, 3, {1, 0, 0});
  CHECK(cce(gt, gt) == doctest::Approx(0.0).epsilon(kTol));
  CHECK(cce(gt, make(1, 1, 3, {1.0 / 3, 1.0 / 3, 1.0 / 3})) ==
        doctest::Approx(std::log(3.0)).epsilon(kTol));
  const auto g2 = make(1, 2, 2, {1, 0, 0, 1});
  CHECK(cce(g2, make(1, 2, 2, {0.5, 0.5, 0.5, 0.5})) ==
        doctest::Approx(std::log(2.0)).epsilon(kTol));
  // Clamped at 1e-7 when the prediction is exactly zero.
  CHECK(cce(gt, make(1, 1, 3, {0, 1, 0})) == doctest::Approx(-std::log(1e-7)));
  CHECK_THROWS_AS(cce(gt, make(1, 2, 3, {1, 0, 0, 1, 0, 0})), DataError);
}

TEST_CASE("dice loss hand values") {
  Tensor g(2, 4, 1, 0.0), p(2, 4, 1, 0.0);
  for (int i = 0; i < 4; ++i) g[i] = 1.0;
  for (int i = 2; i < 6; ++i) p[i] = 1.0;
  const double eps = 1e-6;
  CHECK(std::abs(dice_loss_class(g, p, 0) - (1.0 - (4.0 + eps) / (8.0 + eps))) < 1e-12);
  CHECK(std::abs(dice_loss_class(g, p, 0) - 0.5) < kTol);
  CHECK(std::abs(dice_loss_class(g, g, 0)) < kTol);
  Tensor z(2, 2, 1, 0.0);
  CHECK(dice_loss_class(z, z, 0) == 0.0);
  CHECK_THROWS_AS(dice_loss_class(g, p, 1), std::invalid_argument);
}

TEST_CASE("pixel-class loss") {
  Rng rng(4);
  const auto gt = random_one_hot(rng, 4, 4, 3);
  CHECK(std::abs(loss_p(gt, gt)) < kTol);

  const auto pred = random_prob(rng, 4, 4, 3);
  const double direct = 2 * cce(gt, pred) + 1 * dice_loss_class(gt, pred, 0) +
                        2 * dice_loss_class(gt, pred, 1);
  CHECK(std::abs(loss_p(gt, pred) - direct) < 1e-12);

  // Uniform prediction against an all-background target.
  const std::size_t n = 16;
  Tensor bg(4, 4, 3, 0.0), uni(4, 4, 3, 1.0 / 3);
  for (std::size_t p = 0; p < n; ++p) bg[p * 3 + 2] = 1.0;
  const double eps = 1e-6;
  const double empty_dice = 1.0 - eps / (n / 3.0 + eps);
  const double expected = 2 * std::log(3.0) + 1 * empty_dice + 2 * empty_dice;
  CHECK(std::abs(loss_p(bg, uni) - expected) < kTol);
  CHECK(std::abs(loss_p(bg, uni) - 5.197) < 1e-3);

  CHECK_THROWS_AS(loss_p(make(1, 1, 2, {1, 0}), make(1, 1, 2, {1, 0})), DataError);
}

TEST_CASE("masked MAE") {
  Rng rng(9);
  const auto gt = random_field(rng, 5, 6, 4);
  Tensor mask(5, 6, 1, 0.0);
  for (auto& v : mask.storage()) v = rng.uniform();
  CHECK(masked_mae(gt, gt, mask) == 0.0);
  auto shifted = gt;
  for (auto& v : shifted.storage()) v += 0.5;
  CHECK(std::abs(masked_mae(gt, shifted, mask) - 0.5) < 1e-12);
  auto scaled = mask;
  for (auto& v : scaled.storage()) v *= 7.5;
  const auto pred = random_field(rng, 5, 6, 4);
  CHECK(std::abs(masked_mae(gt, pred, mask) - masked_mae(gt, pred, scaled)) < 1e-12);

  const auto g1 = make(1, 1, 4, {0, 0, 0, 0});
  const auto p1 = make(1, 1, 4, {1, -1, 0.5, -0.5});
  CHECK(masked_mae(g1, p1, make(1, 1, 1, {1.0})) == doctest::Approx(0.75));
  CHECK_THROWS_AS(masked_mae(g1, p1, make(1, 1, 1, {0.0})), DataError);
}

TEST_CASE("masked gradient MSE") {
  Rng rng(10);
  const auto gt = random_field(rng, 8, 9, 4);
  Tensor mask(8, 9, 1, 1.0);
  CHECK(masked_gradient_mse(gt, gt, mask) == 0.0);

  // Interior-only mask: a per-channel constant offset has no gradient there.
  Tensor interior(8, 9, 1, 0.0);
  for (int r = 2; r < 6; ++r)
    for (int c = 2; c < 7; ++c) interior(r, c) = 1.0;
  auto offset = gt;
  for (std::size_t p = 0; p < offset.pixels(); ++p)
    for (std::size_t k = 0; k < 4; ++k) offset[p * 4 + k] += 0.25 * (k + 1);
  CHECK(std::abs(masked_gradient_mse(gt, offset, interior)) < 1e-12);

  // Column ramp in the horizontal channel against a zero prediction.
  const std::size_t h = 10, w = 12;
  Tensor ramp(h, w, 4, 0.0), zero(h, w, 4, 0.0), m(h, w, 1, 0.0);
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c) ramp(r, c, 1) = static_cast<double>(c) / w;
  for (std::size_t r = 2; r < h - 2; ++r)
    for (std::size_t c = 2; c < w - 2; ++c) m(r, c) = 1.0;
  const auto bank = post::sobel_bank();
  double acc = 0.0, msum = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    const auto resp = oracle::correlate(ramp, k, bank.kernels[k]);
    for (std::size_t p = 0; p < h * w; ++p) acc += resp[p] * resp[p] * m[p];
  }
  for (auto v : m.values()) msum += v;
  CHECK(std::abs(masked_gradient_mse(ramp, zero, m) - acc / (4 * msum)) < 1e-12);
  // Inside the mask the response is the constant 128 / w.
  CHECK(std::abs(masked_gradient_mse(ramp, zero, m) - (128.0 / w) * (128.0 / w) / 4) < 1e-9);
}

TEST_CASE("distance loss is linear in its weights") {
  Rng rng(12);
  const auto gt = random_field(rng, 6, 6, 4);
  const auto pred = random_field(rng, 6, 6, 4);
  Tensor mask(6, 6, 1, 1.0);
  CHECK(loss_r(gt, gt, mask) == 0.0);
  const double direct = 2 * masked_mae(gt, pred, mask) + 2 * masked_gradient_mse(gt, pred, mask);
  CHECK(std::abs(loss_r(gt, pred, mask) - direct) < 1e-12);
  LossWeights twice;
  twice.mae = 4;
  twice.gradient_mse = 4;
  CHECK(std::abs(loss_r(gt, pred, mask, twice) - 2 * loss_r(gt, pred, mask)) < 1e-12);
}

TEST_CASE("pixel-wise Tversky") {
  const double eps = 1e-6, a = 0.7;
  CHECK(tversky_pixelwise(make(1, 1, 1, {1}), make(1, 1, 1, {1}), a, eps) == 0.0);
  CHECK(tversky_pixelwise(make(1, 1, 1, {1}), make(1, 1, 1, {0}), a, eps) ==
        doctest::Approx(1.0 - eps / (a + eps)));
  CHECK(tversky_pixelwise(make(1, 1, 1, {0}), make(1, 1, 1, {0}), a, eps) == 0.0);
  Rng rng(14);
  const auto gt = random_one_hot(rng, 3, 5, 4);
  const auto pred = random_prob(rng, 3, 5, 4);
  double acc = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) acc += tversky_term(gt[i], pred[i], a, eps);
  CHECK(std::abs(tversky_pixelwise(gt, pred, a, eps) - acc / gt.size()) < 1e-12);
  CHECK_THROWS_AS(tversky_pixelwise(gt, pred, 1.0, eps), std::invalid_argument);
  CHECK_THROWS_AS(tversky_pixelwise(gt, pred, 0.0, eps), std::invalid_argument);
}

TEST_CASE("type-head loss") {
  const auto gt = make(1, 1, 2, {1, 0});
  const auto pred = make(1, 1, 2, {0.5, 0.5});
  const auto mask = make(1, 1, 1, {1.0});
  const double eps = 1e-6;
  const double t1 = tversky_term(1, 0.5, 0.7, eps);
  const double t2 = tversky_term(0, 0.5, 0.7, eps);
  const double expected = 5 * (std::log(2.0) + (t1 + t2) / 2);
  CHECK(std::abs(loss_t(gt, pred, mask) - expected) < kTol);
  CHECK(std::abs(loss_t(gt, pred, mask) - 6.995) < 1e-3);
  LossWeights ten;
  ten.type_head = 10;
  CHECK(std::abs(loss_t(gt, pred, mask, ten) - 2 * loss_t(gt, pred, mask)) < 1e-12);
  CHECK(std::abs(loss_t(gt, gt, mask)) < kTol);

  // The weighted cross-entropy normalises by the mask sum.
  Rng rng(15);
  const auto g = random_one_hot(rng, 4, 4, 3);
  const auto q = random_prob(rng, 4, 4, 3);
  Tensor m(4, 4, 1, 0.0);
  for (auto& v : m.storage()) v = rng.uniform() < 0.5 ? 1.0 : 0.05;
  double num = 0.0, den = 0.0;
  for (std::size_t p = 0; p < 16; ++p) {
    for (std::size_t k = 0; k < 3; ++k) num -= g[p * 3 + k] * std::log(q[p * 3 + k]) * m[p];
    den += m[p];
  }
  CHECK(std::abs(cce_weighted(g, q, m) - num / den) < 1e-12);
}

TEST_CASE("total loss") {
  Rng rng(16);
  const auto gp = random_one_hot(rng, 6, 6, 3);
  const auto pp = random_prob(rng, 6, 6, 3);
  const auto gd = random_field(rng, 6, 6, 4);
  const auto pd = random_field(rng, 6, 6, 4);
  const auto gt_t = random_one_hot(rng, 6, 6, 5);
  const auto pr_t = random_prob(rng, 6, 6, 5);
  Tensor mask(6, 6, 1, 1.0);

  const auto perfect = total_loss({&gp, &gp, &gd, &gd, &mask, &gt_t, &gt_t});
  CHECK(std::abs(perfect.total) < kTol);

  const auto full = total_loss({&gp, &pp, &gd, &pd, &mask, &gt_t, &pr_t});
  REQUIRE(full.loss_t);
  CHECK(std::abs(full.total - (full.loss_p + full.loss_r + *full.loss_t)) < 1e-12);
  CHECK(std::abs(full.loss_p - loss_p(gp, pp)) < 1e-12);

  const auto no_types = total_loss({&gp, &pp, &gd, &pd, &mask, nullptr, nullptr});
  CHECK_FALSE(no_types.loss_t);
  CHECK(std::abs(no_types.total - (loss_p(gp, pp) + loss_r(gd, pd, mask))) < 1e-12);

  CHECK_THROWS_AS(total_loss({&gp, &pp, &gd, &pd, &mask, &gt_t, nullptr}), std::invalid_argument);
  LossWeights bad;
  bad.tversky_alpha = 0.4;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("losses are invariant to pixel order") {
  Rng rng(17);
  const auto gt = random_one_hot(rng, 4, 5, 3);
  const auto pred = random_prob(rng, 4, 5, 3);
  Tensor g2(5, 4, 3, 0.0), p2(5, 4, 3, 0.0);
  // Reverse the pixel order.
  for (std::size_t p = 0; p < 20; ++p)
    for (std::size_t k = 0; k < 3; ++k) {
      g2[(19 - p) * 3 + k] = gt[p * 3 + k];
      p2[(19 - p) * 3 + k] = pred[p * 3 + k];
    }
  CHECK(cce(gt, pred) == doctest::Approx(cce(g2, p2)));
  CHECK(tversky_pixelwise(gt, pred, 0.7, 1e-6) == doctest::Approx(tversky_pixelwise(g2, p2, 0.7, 1e-6)));
}
