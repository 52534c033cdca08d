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

#include "cisca/sobel.hpp"

#include <algorithm>
#include <string>

namespace cisca::post {

SobelBank sobel_bank() {
  constexpr std::array<double, 5> smooth{1, 4, 6, 4, 1};
  constexpr std::array<double, 5> deriv{-1, -2, 0, 2, 1};
  Kernel5 sx{}, sy{};
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      sx[i][j] = smooth[i] * deriv[j];
      sy[i][j] = deriv[i] * smooth[j];
    }
  }
  SobelBank bank;
  bank.kernels[0] = sy;
  bank.kernels[1] = sx;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      bank.kernels[2][i][j] = (sx[i][j] + sy[i][j]) / 2.0;
      bank.kernels[3][i][j] = (sx[i][j] - sy[i][j]) / 2.0;
    }
  }
  return bank;
}

namespace {

void check_channel(const Tensor& src, std::size_t channel) {
  if (channel >= src.channels()) {
    throw DataError("correlate5: channel " + std::to_string(channel) +
                    " out of range");
  }
}

}  // namespace

Tensor correlate5(const Tensor& src, std::size_t channel, const Kernel5& kernel) {
  check_channel(src, channel);
  const auto h = static_cast<std::ptrdiff_t>(src.height());
  const auto w = static_cast<std::ptrdiff_t>(src.width());
  const auto ch = src.channels();
  Tensor out(src.height(), src.width(), 1, 0.0);
  const double* in = src.values().data();
  double* dst = out.values().data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < h; ++r) {
    const std::ptrdiff_t i0 = std::max<std::ptrdiff_t>(0, 2 - r);
    const std::ptrdiff_t i1 = std::min<std::ptrdiff_t>(5, h - r + 2);
    for (std::ptrdiff_t c = 0; c < w; ++c) {
      const std::ptrdiff_t j0 = std::max<std::ptrdiff_t>(0, 2 - c);
      const std::ptrdiff_t j1 = std::min<std::ptrdiff_t>(5, w - c + 2);
      double acc = 0.0;
      for (std::ptrdiff_t i = i0; i < i1; ++i) {
        const double* row = in + ((r + i - 2) * w) * static_cast<std::ptrdiff_t>(ch);
        for (std::ptrdiff_t j = j0; j < j1; ++j) {
          acc += kernel[i][j] * row[(c + j - 2) * static_cast<std::ptrdiff_t>(ch) +
                                    static_cast<std::ptrdiff_t>(channel)];
        }
      }
      dst[r * w + c] = acc;
    }
  }
  return out;
}

Tensor directional_gradients(const Tensor& dist, const SobelBank& bank) {
  if (dist.channels() != bank.kernels.size()) {
    throw DataError("directional_gradients expects a 4-channel tensor");
  }
  Tensor out(dist.height(), dist.width(), dist.channels(), 0.0);
  for (std::size_t k = 0; k < dist.channels(); ++k) {
    const Tensor g = correlate5(dist, k, bank.kernels[k]);
    for (std::size_t p = 0; p < g.size(); ++p) out[p * dist.channels() + k] = g[p];
  }
  return out;
}

namespace serial {

Tensor correlate5(const Tensor& src, std::size_t channel, const Kernel5& kernel) {
  check_channel(src, channel);
  const auto h = static_cast<long>(src.height());
  const auto w = static_cast<long>(src.width());
  Tensor out(src.height(), src.width(), 1, 0.0);
  for (long r = 0; r < h; ++r) {
    for (long c = 0; c < w; ++c) {
      double acc = 0.0;
      for (long i = -2; i <= 2; ++i) {
        for (long j = -2; j <= 2; ++j) {
          const long sr = r + i;
          const long sc = c + j;
          if (sr < 0 || sr >= h || sc < 0 || sc >= w) continue;
          acc += kernel[i + 2][j + 2] *
                 src(static_cast<std::size_t>(sr), static_cast<std::size_t>(sc), channel);
        }
      }
      out(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = acc;
    }
  }
  return out;
}

}  // namespace serial

}  // namespace cisca::post
