#pragma once

#include "pansr/metrics/canny.hpp"
#include "pansr/metrics/ssim.hpp"
#include "pansr/raster.hpp"

namespace pansr::metrics {

/// Constants of the information-theoretic statistic similarity measure. The
/// defaults reproduce the widely used up42 `image-similarity-measures`
/// implementation, which is what the conformance fixture is generated from.
struct IssmParams {
  double A = 0.3;
  double B = 0.5;
  double C = 0.7;
  /// Stabilizer added to numerator and denominator (Euler's number).
  double e = 2.718281828459045;
  /// Bands are scaled by this factor and truncated to 8 bits before edge
  /// detection (4095 * 0.0625 -> 255).
  double edge_scale = 0.0625;
  CannyParams canny = CannyParams::opencv(100.0, 200.0);
  /// Bins per axis of the joint histogram.
  int histogram_bins = 10;
  SsimParams ssim = SsimParams::uniform7();

  void validate() const;
};

/// Components of one band's score, kept for diagnostics and fixture checks.
struct IssmTerms {
  double ehs = 0.0;
  /// Correlation of the two edge maps; NaN when either map is constant.
  double ec = 0.0;
  double ssim = 0.0;
  /// Combined value; a NaN combination is reported as 0.
  double value = 0.0;
};

IssmTerms issm_terms(const Plane& x, const Plane& y, const IssmParams& p = {});

/// Pearson correlation of two binary edge maps.
double edge_correlation(const EdgeMap& a, const EdgeMap& b);

double issm(const Plane& x, const Plane& y, const IssmParams& p = {});

/// Per-band ISSM averaged over bands.
double issm(const RasterImage& x, const RasterImage& y, const IssmParams& p = {});

}  // namespace pansr::metrics
