#pragma once

#include "pansr/raster.hpp"

namespace pansr::metrics {

/// Peak signal-to-noise ratio in dB with peak L. The squared error is pooled
/// over all bands and pixels; identical inputs give +infinity.
double psnr(const RasterImage& x, const RasterImage& y, double L = kMaxSample12);

/// Pooled mean squared error.
double mse(const RasterImage& x, const RasterImage& y);

}  // namespace pansr::metrics
