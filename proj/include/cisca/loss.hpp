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

#include <optional>

#include "cisca/raster.hpp"
#include "cisca/sobel.hpp"

// Forward values of the three training losses. Nothing here computes
// gradients; the functions exist to check a training implementation against.
namespace cisca::loss {

struct LossWeights {
  double ce_pixel = 2.0;        // lambda1
  double dice_boundary = 1.0;   // lambda2
  double dice_body = 2.0;       // lambda3
  double mae = 2.0;             // lambda4
  double gradient_mse = 2.0;    // lambda5
  double type_head = 5.0;       // lambda6
  double tversky_alpha = 0.7;
  double epsilon = 1e-6;        // Dice / Tversky smoothing
  double prob_floor = 1e-7;     // clamp before log

  void validate() const;
};

/// Per-pixel channel sums must be 1 within 1e-5 and values in [0, 1].
void validate_prob(const Tensor& prob, const char* what);

/// Mean categorical cross-entropy over pixels, -(1/HW) sum gt * log(pred).
double cce(const Tensor& gt, const Tensor& pred, double prob_floor = 1e-7);

/// Cross-entropy with each pixel term weighted by `mask`, normalised by the
/// mask sum.
double cce_weighted(const Tensor& gt, const Tensor& pred, const Tensor& mask,
                    double prob_floor = 1e-7);

/// 1 - (2 sum(g p) + eps) / (sum g + sum p + eps) for channel k.
double dice_loss_class(const Tensor& gt, const Tensor& pred, std::size_t k,
                       double epsilon = 1e-6);

/// lambda1 CE + lambda2 Dice(BD) + lambda3 Dice(CB); channels (BD, CB, BG).
double loss_p(const Tensor& gt, const Tensor& pred, const LossWeights& w = {});

/// sum |gt - pred| * mask / (channels * sum mask).
double masked_mae(const Tensor& gt, const Tensor& pred, const Tensor& mask);

/// Masked mean squared difference of the oriented 5x5 Sobel responses.
double masked_gradient_mse(const Tensor& gt, const Tensor& pred, const Tensor& mask,
                           const post::SobelBank& bank);
double masked_gradient_mse(const Tensor& gt, const Tensor& pred, const Tensor& mask);

/// lambda4 MAE + lambda5 gradient MSE.
double loss_r(const Tensor& gt, const Tensor& pred, const Tensor& mask,
              const LossWeights& w = {});

/// Mean over pixels and channels of the per-element Tversky term.
double tversky_pixelwise(const Tensor& gt, const Tensor& pred, double alpha,
                         double epsilon);

/// lambda6 (mask-weighted CE + pixel-wise Tversky).
double loss_t(const Tensor& gt, const Tensor& pred, const Tensor& mask,
              const LossWeights& w = {});

struct LossInputs {
  const Tensor* gt_prob = nullptr;
  const Tensor* pred_prob = nullptr;
  const Tensor* gt_dist = nullptr;
  const Tensor* pred_dist = nullptr;
  const Tensor* mask = nullptr;
  /// Type head; both null when the model has none.
  const Tensor* gt_types = nullptr;
  const Tensor* pred_types = nullptr;
};

struct LossBreakdown {
  double loss_p = 0.0;
  double loss_r = 0.0;
  std::optional<double> loss_t;
  double total = 0.0;
};

LossBreakdown total_loss(const LossInputs& in, const LossWeights& w = {});

}  // namespace cisca::loss
