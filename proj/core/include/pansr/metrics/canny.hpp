#pragma once

#include <cstdint>
#include <vector>

#include "pansr/raster.hpp"

namespace pansr::metrics {

enum class GradientKernel { Sobel3, Scharr3 };

struct CannyParams {
  /// Gaussian pre-smoothing; <= 0 disables it.
  double gaussian_sigma = 1.4;
  GradientKernel kernel = GradientKernel::Scharr3;
  /// Euclidean magnitude when set, |gx| + |gy| otherwise.
  bool l2_magnitude = true;
  /// Thresholds are fractions of the maximum gradient magnitude when set,
  /// absolute magnitudes otherwise.
  bool relative_thresholds = true;
  double low = 0.1;
  double high = 0.2;

  void validate() const;

  /// Settings reproducing OpenCV's Canny(img, low, high) on 8-bit input:
  /// no smoothing, 3x3 Sobel, L1 magnitude, absolute floored thresholds.
  static CannyParams opencv(double low, double high);
};

/// Binary edge map: 1 on edges, 0 elsewhere, row-major.
struct EdgeMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> edges;

  std::uint8_t operator()(int x, int y) const { return edges[static_cast<std::size_t>(y) * width + x]; }
  std::size_t count() const;
};

/// Smoothing, gradient, non-maximum suppression along the quantized gradient
/// direction, then 8-connected hysteresis. Magnitudes outside the image count
/// as zero during suppression.
EdgeMap canny_edges(const Plane& band, const CannyParams& p = {});

}  // namespace pansr::metrics
