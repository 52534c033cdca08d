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

#include "cisca/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cisca::loss {

void LossWeights::validate() const {
  if (!(tversky_alpha > 0.5 && tversky_alpha < 1.0)) {
    throw std::invalid_argument("tversky_alpha must lie in (0.5, 1)");
  }
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (!(prob_floor > 0.0)) throw std::invalid_argument("prob_floor must be positive");
}

void validate_prob(const Tensor& prob, const char* what) {
  const std::size_t ch = prob.channels();
  for (std::size_t p = 0; p < prob.pixels(); ++p) {
    double sum = 0.0;
    for (std::size_t k = 0; k < ch; ++k) {
      const double v = prob[p * ch + k];
      if (!(v >= 0.0 && v <= 1.0)) {
        throw DataError(std::string(what) + ": probability outside [0,1] at pixel " +
                        std::to_string(p));
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-5) {
      throw DataError(std::string(what) + ": channel sum " + std::to_string(sum) +
                      " != 1 at pixel " + std::to_string(p));
    }
  }
}

namespace {

void require_mask(const Tensor& mask, const Tensor& ref, const char* what) {
  require_same_plane(mask, ref, what);
  if (mask.channels() != 1) {
    throw DataError(std::string(what) + ": weight mask must be single-channel");
  }
}

double mask_sum(const Tensor& mask, const char* what) {
  double s = 0.0;
  for (double v : mask.values()) s += v;
  if (!(s > 0.0)) throw DataError(std::string(what) + ": weight mask sums to zero");
  return s;
}

}  // namespace

double cce(const Tensor& gt, const Tensor& pred, double prob_floor) {
  require_same_shape(gt, pred, "cce");
  double acc = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt[i] != 0.0) acc += gt[i] * std::log(std::max(pred[i], prob_floor));
  }
  return -acc / static_cast<double>(gt.pixels());
}

double cce_weighted(const Tensor& gt, const Tensor& pred, const Tensor& mask,
                    double prob_floor) {
  require_same_shape(gt, pred, "cce_weighted");
  require_mask(mask, gt, "cce_weighted");
  const std::size_t ch = gt.channels();
  double acc = 0.0;
  for (std::size_t p = 0; p < gt.pixels(); ++p) {
    double term = 0.0;
    for (std::size_t k = 0; k < ch; ++k) {
      const double g = gt[p * ch + k];
      if (g != 0.0) term += g * std::log(std::max(pred[p * ch + k], prob_floor));
    }
    acc += term * mask[p];
  }
  return -acc / mask_sum(mask, "cce_weighted");
}

double dice_loss_class(const Tensor& gt, const Tensor& pred, std::size_t k,
                       double epsilon) {
  require_same_shape(gt, pred, "dice_loss_class");
  if (k >= gt.channels()) {
    throw std::invalid_argument("dice_loss_class: channel " + std::to_string(k) +
                                " out of range");
  }
  const std::size_t ch = gt.channels();
  double inter = 0.0, sg = 0.0, sp = 0.0;
  for (std::size_t p = 0; p < gt.pixels(); ++p) {
    const double g = gt[p * ch + k];
    const double q = pred[p * ch + k];
    inter += g * q;
    sg += g;
    sp += q;
  }
  return 1.0 - (2.0 * inter + epsilon) / (sg + sp + epsilon);
}

double loss_p(const Tensor& gt, const Tensor& pred, const LossWeights& w) {
  w.validate();
  require_same_shape(gt, pred, "loss_p");
  if (gt.channels() != 3) {
    throw DataError("loss_p: expected 3 channels (BD, CB, BG), got " +
                    std::to_string(gt.channels()));
  }
  return w.ce_pixel * cce(gt, pred, w.prob_floor) +
         w.dice_boundary * dice_loss_class(gt, pred, 0, w.epsilon) +
         w.dice_body * dice_loss_class(gt, pred, 1, w.epsilon);
}

double masked_mae(const Tensor& gt, const Tensor& pred, const Tensor& mask) {
  require_same_shape(gt, pred, "masked_mae");
  require_mask(mask, gt, "masked_mae");
  const std::size_t ch = gt.channels();
  const double denom = static_cast<double>(ch) * mask_sum(mask, "masked_mae");
  double acc = 0.0;
  for (std::size_t p = 0; p < gt.pixels(); ++p) {
    double term = 0.0;
    for (std::size_t k = 0; k < ch; ++k) term += std::abs(gt[p * ch + k] - pred[p * ch + k]);
    acc += term * mask[p];
  }
  return acc / denom;
}

double masked_gradient_mse(const Tensor& gt, const Tensor& pred, const Tensor& mask,
                           const post::SobelBank& bank) {
  require_same_shape(gt, pred, "masked_gradient_mse");
  require_mask(mask, gt, "masked_gradient_mse");
  if (gt.channels() != bank.kernels.size()) {
    throw DataError("masked_gradient_mse: expected 4 distance channels");
  }
  const double denom =
      static_cast<double>(gt.channels()) * mask_sum(mask, "masked_gradient_mse");
  double acc = 0.0;
  for (std::size_t k = 0; k < gt.channels(); ++k) {
    const Tensor ga = post::correlate5(gt, k, bank.kernels[k]);
    const Tensor gb = post::correlate5(pred, k, bank.kernels[k]);
    for (std::size_t p = 0; p < ga.size(); ++p) {
      const double d = ga[p] - gb[p];
      acc += d * d * mask[p];
    }
  }
  return acc / denom;
}

double masked_gradient_mse(const Tensor& gt, const Tensor& pred, const Tensor& mask) {
  return masked_gradient_mse(gt, pred, mask, post::sobel_bank());
}

double loss_r(const Tensor& gt, const Tensor& pred, const Tensor& mask,
              const LossWeights& w) {
  return w.mae * masked_mae(gt, pred, mask) +
         w.gradient_mse * masked_gradient_mse(gt, pred, mask);
}

double tversky_pixelwise(const Tensor& gt, const Tensor& pred, double alpha,
                         double epsilon) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("tversky alpha must lie in (0, 1)");
  }
  require_same_shape(gt, pred, "tversky_pixelwise");
  double acc = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const double y = gt[i];
    const double q = pred[i];
    const double tp = y * q;
    const double denom = tp + alpha * y * (1.0 - q) + (1.0 - alpha) * (1.0 - y) * q;
    acc += 1.0 - (tp + epsilon) / (denom + epsilon);
  }
  return acc / static_cast<double>(gt.size());
}

double loss_t(const Tensor& gt, const Tensor& pred, const Tensor& mask,
              const LossWeights& w) {
  w.validate();
  return w.type_head * (cce_weighted(gt, pred, mask, w.prob_floor) +
                        tversky_pixelwise(gt, pred, w.tversky_alpha, w.epsilon));
}

LossBreakdown total_loss(const LossInputs& in, const LossWeights& w) {
  if (!in.gt_prob || !in.pred_prob || !in.gt_dist || !in.pred_dist || !in.mask) {
    throw std::invalid_argument("total_loss: pixel-class, distance and mask inputs are required");
  }
  if (static_cast<bool>(in.gt_types) != static_cast<bool>(in.pred_types)) {
    throw std::invalid_argument("total_loss: type GT and prediction must be given together");
  }
  LossBreakdown out;
  out.loss_p = loss_p(*in.gt_prob, *in.pred_prob, w);
  out.loss_r = loss_r(*in.gt_dist, *in.pred_dist, *in.mask, w);
  out.total = out.loss_p + out.loss_r;
  if (in.gt_types) {
    out.loss_t = loss_t(*in.gt_types, *in.pred_types, *in.mask, w);
    out.total += *out.loss_t;
  }
  return out;
}

}  // namespace cisca::loss
