#include "pansr/metrics/psnr.hpp"

#include <cmath>
#include <limits>

#include "pansr/error.hpp"

namespace pansr::metrics {

double mse(const RasterImage& x, const RasterImage& y) {
  if (!x.same_shape(y)) throw ValidationError("mse: image shapes differ");
  double sum = 0.0;
  std::size_t n = 0;
  for (int b = 0; b < x.band_count(); ++b) {
    const auto xv = x.bands[b].values();
    const auto yv = y.bands[b].values();
    for (std::size_t i = 0; i < xv.size(); ++i) {
      const double d = xv[i] - yv[i];
      sum += d * d;
    }
    n += xv.size();
  }
  return n ? sum / static_cast<double>(n) : 0.0;
}

double psnr(const RasterImage& x, const RasterImage& y, double L) {
  if (!x.same_shape(y)) throw ValidationError("psnr: image shapes differ");
  const double e = mse(x, y);
  if (e == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(L * L / e);
}

}  // namespace pansr::metrics
