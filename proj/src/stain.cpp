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

#include "cisca/stain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace cisca::stain {

namespace {

constexpr double kWhite[3] = {0.95047, 1.0, 1.08883};
constexpr double kXyzFromRgb[3][3] = {{0.412453, 0.357580, 0.180423},
                                      {0.212671, 0.715160, 0.072169},
                                      {0.019334, 0.119193, 0.950227}};

const Eigen::Matrix3d& rgb_from_xyz() {
  static const Eigen::Matrix3d inv = [] {
    Eigen::Matrix3d m;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m(i, j) = kXyzFromRgb[i][j];
    return Eigen::Matrix3d(m.inverse());
  }();
  return inv;
}

void require_rgb(const Image8& rgb, const char* what) {
  if (rgb.channels() != 3) {
    throw DataError(std::string(what) + ": expected 3 channels, got " +
                    std::to_string(rgb.channels()));
  }
  if (rgb.height() == 0 || rgb.width() == 0) throw DataError(std::string(what) + ": empty image");
}

double srgb_to_linear(double c) {
  return c > 0.04045 ? std::pow((c + 0.055) / 1.055, 2.4) : c / 12.92;
}

double linear_to_srgb(double c) {
  return c > 0.0031308 ? 1.055 * std::pow(c, 1.0 / 2.4) - 0.055 : 12.92 * c;
}

double lab_f(double t) { return t > 0.008856 ? std::cbrt(t) : 7.787 * t + 16.0 / 116.0; }

double lab_finv(double f) {
  const double t = f * f * f;
  return t > 0.008856 ? t : (f - 16.0 / 116.0) / 7.787;
}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::nearbyint(v), 0.0, 255.0));
}

Eigen::MatrixXd stain_columns(const StainMatrix& m) {
  if (m.stains.empty() || m.stains.size() > 3) {
    throw std::invalid_argument("stain matrix needs 1..3 stain vectors");
  }
  Eigen::MatrixXd cols(3, static_cast<Eigen::Index>(m.stains.size()));
  for (std::size_t k = 0; k < m.stains.size(); ++k) {
    for (int i = 0; i < 3; ++i) cols(i, static_cast<Eigen::Index>(k)) = m.stains[k][i];
  }
  return cols;
}

std::array<double, 3> unit(std::array<double, 3> v) {
  const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  if (n <= 0.0) throw std::invalid_argument("stain vector has zero length");
  for (auto& x : v) x /= n;
  return v;
}

std::vector<double> concentration_percentiles(const Tensor& conc, double pct) {
  std::vector<double> out;
  for (std::size_t k = 0; k < conc.channels(); ++k) {
    std::vector<double> vals;
    vals.reserve(conc.pixels());
    for (std::size_t i = 0; i < conc.pixels(); ++i) vals.push_back(conc[i * conc.channels() + k]);
    out.push_back(percentile(std::move(vals), pct));
  }
  return out;
}

Tensor rescale(Tensor conc, const std::vector<double>& source, const std::vector<double>& target) {
  if (source.size() != target.size() || source.size() != conc.channels()) {
    throw DataError("concentration reference has " + std::to_string(target.size()) +
                    " stains, image has " + std::to_string(conc.channels()));
  }
  const std::size_t ch = conc.channels();
  for (std::size_t k = 0; k < ch; ++k) {
    const double scale = source[k] > 1e-12 ? target[k] / source[k] : 1.0;
    for (std::size_t i = 0; i < conc.pixels(); ++i) conc[i * ch + k] *= scale;
  }
  return conc;
}

}  // namespace

Tensor rgb_to_lab(const Image8& rgb) {
  require_rgb(rgb, "rgb_to_lab");
  Tensor lab(rgb.height(), rgb.width(), 3, 0.0);
  for (std::size_t i = 0; i < rgb.pixels(); ++i) {
    double lin[3];
    for (int k = 0; k < 3; ++k) lin[k] = srgb_to_linear(rgb[i * 3 + k] / 255.0);
    double f[3];
    for (int j = 0; j < 3; ++j) {
      const double xyz = kXyzFromRgb[j][0] * lin[0] + kXyzFromRgb[j][1] * lin[1] +
                         kXyzFromRgb[j][2] * lin[2];
      f[j] = lab_f(xyz / kWhite[j]);
    }
    lab[i * 3 + 0] = 116.0 * f[1] - 16.0;
    lab[i * 3 + 1] = 500.0 * (f[0] - f[1]);
    lab[i * 3 + 2] = 200.0 * (f[1] - f[2]);
  }
  return lab;
}

Image8 lab_to_rgb(const Tensor& lab) {
  if (lab.channels() != 3) throw DataError("lab_to_rgb: expected 3 channels");
  const auto& inv = rgb_from_xyz();
  Image8 rgb(lab.height(), lab.width(), 3, 0);
  for (std::size_t i = 0; i < lab.pixels(); ++i) {
    const double fy = (lab[i * 3] + 16.0) / 116.0;
    const double fx = fy + lab[i * 3 + 1] / 500.0;
    const double fz = fy - lab[i * 3 + 2] / 200.0;
    const Eigen::Vector3d xyz(lab_finv(fx) * kWhite[0], lab_finv(fy) * kWhite[1],
                              lab_finv(fz) * kWhite[2]);
    const Eigen::Vector3d lin = inv * xyz;
    for (int k = 0; k < 3; ++k) {
      rgb[i * 3 + k] = to_byte(255.0 * linear_to_srgb(std::clamp(lin[k], 0.0, 1.0)));
    }
  }
  return rgb;
}

LabStats lab_stats(const Tensor& lab) {
  if (lab.channels() != 3 || lab.pixels() == 0) throw DataError("lab_stats: expected non-empty 3-channel input");
  LabStats s;
  const double n = static_cast<double>(lab.pixels());
  for (int k = 0; k < 3; ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < lab.pixels(); ++i) sum += lab[i * 3 + k];
    const double mean = sum / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < lab.pixels(); ++i) {
      const double d = lab[i * 3 + k] - mean;
      ss += d * d;
    }
    s.mean[k] = mean;
    s.std[k] = std::sqrt(ss / n);
  }
  return s;
}

LabStats lab_stats(const Image8& rgb) { return lab_stats(rgb_to_lab(rgb)); }

Image8 apply_style(const Image8& rgb, const LabStats& target) {
  Tensor lab = rgb_to_lab(rgb);
  const LabStats src = lab_stats(lab);
  for (int k = 0; k < 3; ++k) {
    const bool flat = src.std[k] < 1e-6;
    const double scale = flat ? 1.0 : target.std[k] / src.std[k];
    for (std::size_t i = 0; i < lab.pixels(); ++i) {
      double& v = lab[i * 3 + k];
      v = (v - src.mean[k]) * scale + target.mean[k];
    }
  }
  return lab_to_rgb(lab);
}

StainStyleModel fit_style_model(std::span<const LabStats> templates) {
  if (templates.size() < 2) throw DataError("style model needs at least 2 templates");
  StainStyleModel m;
  const double n = static_cast<double>(templates.size());
  auto fit = [&](auto get, std::array<double, 3>& mu, std::array<double, 3>& sigma) {
    for (int k = 0; k < 3; ++k) {
      double sum = 0.0;
      for (const auto& t : templates) sum += get(t)[k];
      mu[k] = sum / n;
      double ss = 0.0;
      for (const auto& t : templates) ss += (get(t)[k] - mu[k]) * (get(t)[k] - mu[k]);
      sigma[k] = std::sqrt(ss / n);
    }
  };
  fit([](const LabStats& t) { return t.mean; }, m.mean_mu, m.mean_sigma);
  fit([](const LabStats& t) { return t.std; }, m.std_mu, m.std_sigma);
  return m;
}

LabStats sample_style(const StainStyleModel& model, Rng& rng) {
  LabStats s;
  for (int k = 0; k < 3; ++k) {
    s.mean[k] = rng.normal(model.mean_mu[k], model.mean_sigma[k]);
    s.std[k] = std::max(0.0, rng.normal(model.std_mu[k], model.std_sigma[k]));
  }
  return s;
}

LabStats sample_style(const StainStyleModel& model, std::uint64_t seed) {
  Rng rng(seed);
  return sample_style(model, rng);
}

Image8 apply_jitter(const Image8& rgb, const JitterParams& params) {
  require_rgb(rgb, "jitter");
  const std::size_t n = rgb.pixels();
  std::vector<double> v(rgb.values().begin(), rgb.values().end());
  for (auto& x : v) x += params.brightness;

  double luma_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    luma_sum += 0.299 * v[i * 3] + 0.587 * v[i * 3 + 1] + 0.114 * v[i * 3 + 2];
  }
  const double mean = luma_sum / static_cast<double>(n);
  for (auto& x : v) x = mean + params.contrast * (x - mean);

  for (std::size_t i = 0; i < n; ++i) {
    const double l = 0.299 * v[i * 3] + 0.587 * v[i * 3 + 1] + 0.114 * v[i * 3 + 2];
    for (int k = 0; k < 3; ++k) v[i * 3 + k] = l + params.saturation * (v[i * 3 + k] - l);
  }

  Image8 out(rgb.height(), rgb.width(), 3, 0);
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = to_byte(v[i]);
  return out;
}

JitterParams sample_jitter(const JitterRanges& ranges, Rng& rng) {
  if (ranges.brightness < 0 || ranges.contrast < 0 || ranges.saturation < 0) {
    throw std::invalid_argument("jitter ranges must be non-negative");
  }
  JitterParams p;
  p.brightness = rng.uniform(-ranges.brightness, ranges.brightness);
  p.contrast = rng.uniform(1.0 - ranges.contrast, 1.0 + ranges.contrast);
  p.saturation = rng.uniform(1.0 - ranges.saturation, 1.0 + ranges.saturation);
  return p;
}

Image8 jitter(const Image8& rgb, const JitterRanges& ranges, std::uint64_t seed) {
  Rng rng(seed);
  return apply_jitter(rgb, sample_jitter(ranges, rng));
}

StainMatrix default_he_matrix() {
  return StainMatrix{{unit({0.65, 0.70, 0.29}), unit({0.07, 0.99, 0.11}),
                      unit({0.27, 0.57, 0.78})}};
}

double optical_density(std::uint8_t value) {
  return -std::log10((static_cast<double>(value) + 1.0) / 256.0);
}

Tensor optical_density(const Image8& rgb) {
  require_rgb(rgb, "optical_density");
  Tensor od(rgb.height(), rgb.width(), 3, 0.0);
  for (std::size_t i = 0; i < rgb.size(); ++i) od[i] = optical_density(rgb[i]);
  return od;
}

Tensor deconvolve_od(const Tensor& od, const StainMatrix& matrix) {
  if (od.channels() != 3) throw DataError("deconvolve: OD tensor must have 3 channels");
  const Eigen::MatrixXd cols = stain_columns(matrix);
  const Eigen::MatrixXd pinv = cols.completeOrthogonalDecomposition().pseudoInverse();
  const auto ns = static_cast<std::size_t>(cols.cols());
  Tensor conc(od.height(), od.width(), ns, 0.0);
  for (std::size_t i = 0; i < od.pixels(); ++i) {
    const Eigen::Vector3d v(od[i * 3], od[i * 3 + 1], od[i * 3 + 2]);
    const Eigen::VectorXd c = pinv * v;
    for (std::size_t k = 0; k < ns; ++k) conc[i * ns + k] = c[static_cast<Eigen::Index>(k)];
  }
  return conc;
}

Tensor ruifrok_deconvolve(const Image8& rgb, const StainMatrix& matrix) {
  return deconvolve_od(optical_density(rgb), matrix);
}

Image8 recompose(const Tensor& concentrations, const StainMatrix& matrix) {
  const Eigen::MatrixXd cols = stain_columns(matrix);
  const auto ns = static_cast<std::size_t>(cols.cols());
  if (concentrations.channels() != ns) {
    throw DataError("recompose: " + std::to_string(concentrations.channels()) +
                    " concentration channels for " + std::to_string(ns) + " stains");
  }
  Image8 rgb(concentrations.height(), concentrations.width(), 3, 0);
  for (std::size_t i = 0; i < concentrations.pixels(); ++i) {
    Eigen::VectorXd c(static_cast<Eigen::Index>(ns));
    for (std::size_t k = 0; k < ns; ++k) c[static_cast<Eigen::Index>(k)] = concentrations[i * ns + k];
    const Eigen::Vector3d od = cols * c;
    for (int k = 0; k < 3; ++k) rgb[i * 3 + k] = to_byte(256.0 * std::pow(10.0, -od[k]) - 1.0);
  }
  return rgb;
}

StainReference stain_reference(const Image8& rgb, const StainMatrix& matrix, double pct) {
  return StainReference{matrix, concentration_percentiles(ruifrok_deconvolve(rgb, matrix), pct)};
}

Image8 ruifrok_normalize(const Image8& rgb, const StainReference& target, double pct) {
  Tensor conc = ruifrok_deconvolve(rgb, target.matrix);
  const auto src = concentration_percentiles(conc, pct);
  return recompose(rescale(std::move(conc), src, target.max_concentration), target.matrix);
}

double percentile(std::vector<double> values, double pct) {
  if (values.empty()) throw DataError("percentile of an empty set");
  if (!(pct >= 0.0 && pct <= 100.0)) throw std::invalid_argument("percentile must be in [0, 100]");
  std::sort(values.begin(), values.end());
  const double pos = pct / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + (values[hi] - values[lo]) * frac;
}

double angle_degrees(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  const auto ua = unit(a);
  const auto ub = unit(b);
  const double dot = std::clamp(ua[0] * ub[0] + ua[1] * ub[1] + ua[2] * ub[2], -1.0, 1.0);
  return std::acos(dot) * 180.0 / std::numbers::pi;
}

StainMatrix macenko_estimate(const Image8& rgb, const MacenkoOptions& opts) {
  require_rgb(rgb, "macenko");
  if (!(opts.angle_percentile > 0.0 && opts.angle_percentile < 50.0)) {
    throw std::invalid_argument("angle percentile must be in (0, 50)");
  }
  std::vector<Eigen::Vector3d> od;
  od.reserve(rgb.pixels());
  for (std::size_t i = 0; i < rgb.pixels(); ++i) {
    const Eigen::Vector3d v(optical_density(rgb[i * 3]), optical_density(rgb[i * 3 + 1]),
                            optical_density(rgb[i * 3 + 2]));
    if (v.norm() >= opts.od_threshold) od.push_back(v);
  }
  if (od.size() < opts.min_pixels) {
    throw DataError("macenko: only " + std::to_string(od.size()) +
                    " tissue pixels above the OD threshold, need " +
                    std::to_string(opts.min_pixels));
  }

  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& v : od) mean += v;
  mean /= static_cast<double>(od.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& v : od) cov += (v - mean) * (v - mean).transpose();
  cov /= static_cast<double>(od.size() - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  // Eigenvalues ascend; the two largest span the stain plane.
  Eigen::Vector3d e1 = eig.eigenvectors().col(2);
  Eigen::Vector3d e2 = eig.eigenvectors().col(1);
  if (e1.sum() < 0) e1 = -e1;
  if (e2.sum() < 0) e2 = -e2;

  std::vector<double> phi;
  phi.reserve(od.size());
  for (const auto& v : od) phi.push_back(std::atan2(v.dot(e2), v.dot(e1)));
  const double lo = percentile(phi, opts.angle_percentile);
  const double hi = percentile(std::move(phi), 100.0 - opts.angle_percentile);

  auto direction = [&](double a) {
    Eigen::Vector3d v = std::cos(a) * e1 + std::sin(a) * e2;
    if (v.sum() < 0) v = -v;
    v.normalize();
    return std::array<double, 3>{v[0], v[1], v[2]};
  };
  auto a = direction(lo);
  auto b = direction(hi);
  if (a[0] < b[0]) std::swap(a, b);
  return StainMatrix{{a, b}};
}

Image8 macenko_normalize(const Image8& rgb, const StainMatrix& source,
                         const StainReference& target, double pct) {
  if (source.stains.size() != target.matrix.stains.size()) {
    throw DataError("macenko: source and target stain counts differ");
  }
  Tensor conc = ruifrok_deconvolve(rgb, source);
  const auto src = concentration_percentiles(conc, pct);
  return recompose(rescale(std::move(conc), src, target.max_concentration), target.matrix);
}

TemplateRef prepare_template(const Image8& rgb) {
  TemplateRef t;
  t.lab = lab_stats(rgb);
  t.ruifrok = stain_reference(rgb, default_he_matrix());
  try {
    t.macenko = stain_reference(rgb, macenko_estimate(rgb));
  } catch (const DataError&) {
    t.macenko.reset();
  }
  return t;
}

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::kStyle: return "style";
    case Strategy::kJitter: return "jitter";
    case Strategy::kTemplate: return "template";
  }
  return "unknown";
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::kNone: return "none";
    case Method::kReinhard: return "reinhard";
    case Method::kRuifrok: return "ruifrok";
    case Method::kMacenko: return "macenko";
  }
  return "unknown";
}

Image8 normalize_to_template(const Image8& rgb, const TemplateRef& tmpl, Method method) {
  switch (method) {
    case Method::kNone: return rgb;
    case Method::kReinhard: return reinhard_normalize(rgb, tmpl.lab);
    case Method::kRuifrok: return ruifrok_normalize(rgb, tmpl.ruifrok);
    case Method::kMacenko: {
      if (!tmpl.macenko) throw DataError("template has too little stain for macenko");
      return macenko_normalize(rgb, macenko_estimate(rgb), *tmpl.macenko);
    }
  }
  return rgb;
}

AugmentResult augment(const Image8& rgb, const AugmentPolicy& policy, std::uint64_t seed) {
  std::vector<Strategy> enabled;
  if (policy.use_style) {
    if (!policy.style_model) throw std::invalid_argument("style strategy needs a fitted style model");
    enabled.push_back(Strategy::kStyle);
  }
  if (policy.use_jitter) enabled.push_back(Strategy::kJitter);
  if (policy.use_template) {
    if (policy.templates.empty()) throw std::invalid_argument("template strategy needs templates");
    enabled.push_back(Strategy::kTemplate);
  }
  if (enabled.empty()) throw std::invalid_argument("augment policy enables no strategy");

  Rng rng(seed);
  AugmentResult out;
  out.strategy = enabled[rng.below(enabled.size())];
  switch (out.strategy) {
    case Strategy::kStyle:
      out.image = apply_style(rgb, sample_style(*policy.style_model, rng));
      break;
    case Strategy::kJitter:
      out.image = apply_jitter(rgb, sample_jitter(policy.jitter, rng));
      break;
    case Strategy::kTemplate: {
      const auto& tmpl = policy.templates[rng.below(policy.templates.size())];
      out.method = static_cast<Method>(1 + rng.below(3));
      try {
        out.image = normalize_to_template(rgb, tmpl, out.method);
      } catch (const DataError&) {
        if (out.method != Method::kMacenko) throw;
        out.method = Method::kReinhard;
        out.image = reinhard_normalize(rgb, tmpl.lab);
      }
      break;
    }
  }
  return out;
}

}  // namespace cisca::stain
