#pragma once

#include <span>
#include <vector>

#include "pansr/raster.hpp"

namespace pansr::metrics {

/// Linear map [0, max_value] -> [0, target]; used to evaluate 8-bit-calibrated
/// metric constants on 12-bit data.
Plane prescale(const Plane& band, double max_value, double target = 255.0);

/// Normalized 1-D Gaussian taps centred on size / 2.
std::vector<double> gaussian_kernel(int size, double sigma);

/// Separable correlation keeping only positions where the full window fits:
/// output is (w - kx + 1) x (h - ky + 1).
Plane filter_valid(const Plane& p, std::span<const double> kx, std::span<const double> ky);

/// Separable correlation with border replication; output has the input size.
Plane filter_same(const Plane& p, std::span<const double> kx, std::span<const double> ky);

struct Gradient {
  Plane gx;
  Plane gy;
};

/// 3x3 derivative operators with border replication and unnormalized integer
/// taps: Sobel (1, 2, 1) and Scharr (3, 10, 3) smoothing across the derivative.
/// gx(x, y) responds to p(x + 1, .) - p(x - 1, .).
Gradient sobel3(const Plane& p);
Gradient scharr3(const Plane& p);

/// Scharr gradient magnitude with taps scaled by 1/16, as used for FSIM's GM term.
Plane scharr_magnitude(const Plane& p);

}  // namespace pansr::metrics
