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

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "cisca/random.hpp"
#include "cisca/raster.hpp"

// Stain normalisation and augmentation for 8-bit RGB histology images.
namespace cisca::stain {

/// sRGB (D65) -> CIE L*a*b*; channels (L, a, b).
Tensor rgb_to_lab(const Image8& rgb);
/// Inverse of rgb_to_lab; out-of-gamut values are clamped.
Image8 lab_to_rgb(const Tensor& lab);

/// Per-channel mean and standard deviation in LAB.
struct LabStats {
  std::array<double, 3> mean{};
  std::array<double, 3> std{};
};

LabStats lab_stats(const Tensor& lab);
LabStats lab_stats(const Image8& rgb);

/// Per-channel affine map in LAB that moves the image statistics onto
/// `target`. A channel with (near) zero spread is only shifted.
Image8 apply_style(const Image8& rgb, const LabStats& target);

/// Reinhard colour transfer; identical to apply_style with template stats.
inline Image8 reinhard_normalize(const Image8& rgb, const LabStats& target) {
  return apply_style(rgb, target);
}

/// Gaussians over the per-image LAB means and standard deviations of a
/// template set.
struct StainStyleModel {
  std::array<double, 3> mean_mu{};
  std::array<double, 3> mean_sigma{};
  std::array<double, 3> std_mu{};
  std::array<double, 3> std_sigma{};
};

StainStyleModel fit_style_model(std::span<const LabStats> templates);

/// Independent Gaussian draw of every style parameter; negative standard
/// deviations are clamped to 0.
LabStats sample_style(const StainStyleModel& model, Rng& rng);
LabStats sample_style(const StainStyleModel& model, std::uint64_t seed);

struct JitterParams {
  double brightness = 0.0;  // additive, intensity levels
  double contrast = 1.0;    // scale about the image mean luma
  double saturation = 1.0;  // blend factor against per-pixel luma
};

Image8 apply_jitter(const Image8& rgb, const JitterParams& params);

/// Half-widths of the uniform ranges jitter draws from: brightness in
/// [-b, b], contrast and saturation in [1 - x, 1 + x].
struct JitterRanges {
  double brightness = 0.0;
  double contrast = 0.0;
  double saturation = 0.0;
};

JitterParams sample_jitter(const JitterRanges& ranges, Rng& rng);
Image8 jitter(const Image8& rgb, const JitterRanges& ranges, std::uint64_t seed);

/// Unit optical-density vectors, one per stain.
struct StainMatrix {
  std::vector<std::array<double, 3>> stains;
};

/// Published H&E(-DAB) vectors for colour deconvolution.
StainMatrix default_he_matrix();

/// OD = -log10((I + 1) / 256) per channel.
double optical_density(std::uint8_t value);

/// Per-channel optical density of an RGB image.
Tensor optical_density(const Image8& rgb);

/// Concentrations from a 3-channel OD tensor via the pseudo-inverse.
Tensor deconvolve_od(const Tensor& od, const StainMatrix& matrix);

/// Stain concentrations from the pseudo-inverse of the stain matrix; one
/// channel per stain.
Tensor ruifrok_deconvolve(const Image8& rgb, const StainMatrix& matrix);
/// Rebuilds RGB from concentrations, I = 256 * 10^-OD - 1.
Image8 recompose(const Tensor& concentrations, const StainMatrix& matrix);

/// Per-stain concentration reference for rescaling.
struct StainReference {
  StainMatrix matrix;
  std::vector<double> max_concentration;  // percentile per stain
};

StainReference stain_reference(const Image8& rgb, const StainMatrix& matrix,
                               double percentile = 99.0);

/// Deconvolve with `matrix`, scale each stain so its percentile matches the
/// template, recompose with the same matrix.
Image8 ruifrok_normalize(const Image8& rgb, const StainReference& target,
                         double percentile = 99.0);

struct MacenkoOptions {
  double od_threshold = 0.15;  // on the Euclidean norm of the OD vector
  double angle_percentile = 1.0;  // uses (p, 100 - p)
  std::size_t min_pixels = 100;
};

/// Two-stain matrix from the extreme angles of the OD cloud in its
/// principal plane. The stain with the larger first (red) OD component comes
/// first. Throws DataError when fewer than `min_pixels` pass the threshold.
StainMatrix macenko_estimate(const Image8& rgb, const MacenkoOptions& opts = {});

/// Deconvolve with `source`, rescale concentration percentiles onto the
/// target reference and recompose with the target matrix.
Image8 macenko_normalize(const Image8& rgb, const StainMatrix& source,
                         const StainReference& target, double percentile = 99.0);

/// Linear-interpolated percentile (0..100) of unsorted values.
double percentile(std::vector<double> values, double pct);

/// Angle in degrees between two OD vectors.
double angle_degrees(const std::array<double, 3>& a, const std::array<double, 3>& b);

/// Precomputed references of one fixed template image.
struct TemplateRef {
  LabStats lab;
  StainReference ruifrok;
  std::optional<StainReference> macenko;
};

TemplateRef prepare_template(const Image8& rgb);

enum class Strategy { kStyle, kJitter, kTemplate };
enum class Method { kNone, kReinhard, kRuifrok, kMacenko };

std::string_view to_string(Strategy s);
std::string_view to_string(Method m);

struct AugmentPolicy {
  bool use_style = true;
  bool use_jitter = true;
  bool use_template = true;
  std::optional<StainStyleModel> style_model;
  JitterRanges jitter{10.0, 0.1, 0.1};
  std::vector<TemplateRef> templates;
};

struct AugmentResult {
  Image8 image;
  Strategy strategy = Strategy::kJitter;
  Method method = Method::kNone;
};

/// Picks one enabled strategy uniformly (style sampling, jitter, or template
/// normalisation with a uniformly chosen method). Fully determined by seed.
AugmentResult augment(const Image8& rgb, const AugmentPolicy& policy, std::uint64_t seed);

/// Applies one normalisation method against a template.
Image8 normalize_to_template(const Image8& rgb, const TemplateRef& tmpl, Method method);

}  // namespace cisca::stain
