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

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cisca {

/// Raised when input data violates a contract (shape mismatch, bad codes,
/// malformed files). The CLI maps it to exit status 1.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense row-major raster with an interleaved channel axis (channel-last).
/// Single-channel rasters are plain 2-D grids.
template <typename T>
class Raster {
 public:
  using value_type = T;

  Raster() = default;
  Raster(std::size_t height, std::size_t width, std::size_t channels = 1,
         T fill = T{})
      : height_(height), width_(width), channels_(channels),
        values_(height * width * channels, fill) {
    if (height == 0 || width == 0 || channels == 0) {
      throw std::invalid_argument("raster dimensions must be positive");
    }
  }
  Raster(std::size_t height, std::size_t width, std::size_t channels,
         std::vector<T> values)
      : height_(height), width_(width), channels_(channels),
        values_(std::move(values)) {
    if (height == 0 || width == 0 || channels == 0) {
      throw std::invalid_argument("raster dimensions must be positive");
    }
    if (values_.size() != height * width * channels) {
      throw DataError("raster value count " + std::to_string(values_.size()) +
                      " does not match shape " + std::to_string(height) + "x" +
                      std::to_string(width) + "x" + std::to_string(channels));
    }
  }

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t channels() const { return channels_; }
  std::size_t pixels() const { return height_ * width_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  T& operator()(std::size_t r, std::size_t c, std::size_t k = 0) {
    return values_[(r * width_ + c) * channels_ + k];
  }
  const T& operator()(std::size_t r, std::size_t c, std::size_t k = 0) const {
    return values_[(r * width_ + c) * channels_ + k];
  }

  T& operator[](std::size_t i) { return values_[i]; }
  const T& operator[](std::size_t i) const { return values_[i]; }

  std::span<T> values() { return values_; }
  std::span<const T> values() const { return values_; }
  std::vector<T>& storage() { return values_; }
  const std::vector<T>& storage() const { return values_; }

  bool same_plane(std::size_t height, std::size_t width) const {
    return height_ == height && width_ == width;
  }
  template <typename U>
  bool same_plane(const Raster<U>& other) const {
    return same_plane(other.height(), other.width());
  }

  bool operator==(const Raster&) const = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t channels_ = 0;
  std::vector<T> values_;
};

/// Per-pixel instance ids; 0 is background.
using LabelMap = Raster<std::int32_t>;
/// Binary mask with values {0, 1}.
using Mask = Raster<std::uint8_t>;
/// Real-valued single- or multi-channel data (probabilities, distances,
/// weights).
using Tensor = Raster<double>;
/// 8-bit image, typically 3-channel RGB.
using Image8 = Raster<std::uint8_t>;

template <typename A, typename B>
void require_same_plane(const Raster<A>& a, const Raster<B>& b,
                        const char* what) {
  if (!a.same_plane(b)) {
    throw DataError(std::string(what) + ": shape mismatch (" +
                    std::to_string(a.height()) + "x" +
                    std::to_string(a.width()) + " vs " +
                    std::to_string(b.height()) + "x" +
                    std::to_string(b.width()) + ")");
  }
}

template <typename A, typename B>
void require_same_shape(const Raster<A>& a, const Raster<B>& b,
                        const char* what) {
  require_same_plane(a, b, what);
  if (a.channels() != b.channels()) {
    throw DataError(std::string(what) + ": channel mismatch (" +
                    std::to_string(a.channels()) + " vs " +
                    std::to_string(b.channels()) + ")");
  }
}

}  // namespace cisca
