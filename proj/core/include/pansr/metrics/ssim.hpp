#pragma once

#include "pansr/raster.hpp"

namespace pansr::metrics {

enum class WindowKind { Gaussian, Uniform };

struct SsimParams {
  double L = kMaxSample12;
  double k1 = 0.01;
  double k2 = 0.03;
  WindowKind window = WindowKind::Gaussian;
  int window_size = 11;
  double sigma = 1.5;
  /// Scale local (co)variances by N / (N - 1) for an N-pixel window.
  bool sample_covariance = false;

  double c1() const { return (k1 * L) * (k1 * L); }
  double c2() const { return (k2 * L) * (k2 * L); }
  void validate() const;

  /// 7x7 uniform window with sample covariance (the scikit-image defaults).
  static SsimParams uniform7(double L = kMaxSample12);
};

/// Normalized 1-D window taps for p (the 2-D window is their outer product).
std::vector<double> ssim_window(const SsimParams& p);

/// Local SSIM at every position where the window fits entirely.
Plane ssim_map(const Plane& x, const Plane& y, const SsimParams& p = {});

/// Mean of ssim_map.
double ssim(const Plane& x, const Plane& y, const SsimParams& p = {});

/// Per-band SSIM averaged over bands.
double ssim(const RasterImage& x, const RasterImage& y, const SsimParams& p = {});

}  // namespace pansr::metrics
