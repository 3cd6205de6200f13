#include "pansr/metrics/ssim.hpp"

#include "pansr/error.hpp"
#include "pansr/metrics/filters.hpp"

namespace pansr::metrics {

void SsimParams::validate() const {
  if (!(L > 0.0) || !(k1 > 0.0) || !(k2 > 0.0)) throw ValidationError("SSIM constants must be positive");
  if (window_size < 1 || window_size % 2 == 0) throw ValidationError("SSIM window size must be odd");
  if (window == WindowKind::Gaussian && !(sigma > 0.0)) throw ValidationError("SSIM sigma must be positive");
}

SsimParams SsimParams::uniform7(double L) {
  SsimParams p;
  p.L = L;
  p.window = WindowKind::Uniform;
  p.window_size = 7;
  p.sample_covariance = true;
  return p;
}

std::vector<double> ssim_window(const SsimParams& p) {
  if (p.window == WindowKind::Uniform) return std::vector<double>(p.window_size, 1.0 / p.window_size);
  return gaussian_kernel(p.window_size, p.sigma);
}

Plane ssim_map(const Plane& x, const Plane& y, const SsimParams& p) {
  p.validate();
  if (x.width() != y.width() || x.height() != y.height()) throw ValidationError("ssim: image shapes differ");
  if (x.width() < p.window_size || x.height() < p.window_size)
    throw ValidationError("ssim: image smaller than the " + std::to_string(p.window_size) + "-pixel window");

  const auto k = ssim_window(p);
  Plane xx(x.width(), x.height()), yy(x.width(), x.height()), xy(x.width(), x.height());
  {
    auto xv = x.values(), yv = y.values();
    auto a = xx.values(), b = yy.values(), c = xy.values();
    for (std::size_t i = 0; i < xv.size(); ++i) {
      a[i] = xv[i] * xv[i];
      b[i] = yv[i] * yv[i];
      c[i] = xv[i] * yv[i];
    }
  }
  const Plane mx = filter_valid(x, k, k);
  const Plane my = filter_valid(y, k, k);
  const Plane mxx = filter_valid(xx, k, k);
  const Plane myy = filter_valid(yy, k, k);
  const Plane mxy = filter_valid(xy, k, k);

  const double n = static_cast<double>(p.window_size) * p.window_size;
  const double cov_norm = p.sample_covariance ? n / (n - 1.0) : 1.0;
  const double c1 = p.c1(), c2 = p.c2();

  Plane out(mx.width(), mx.height());
  auto o = out.values();
  for (std::size_t i = 0; i < o.size(); ++i) {
    const double ux = mx.values()[i], uy = my.values()[i];
    const double vx = cov_norm * (mxx.values()[i] - ux * ux);
    const double vy = cov_norm * (myy.values()[i] - uy * uy);
    const double vxy = cov_norm * (mxy.values()[i] - ux * uy);
    o[i] = ((2.0 * ux * uy + c1) * (2.0 * vxy + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2));
  }
  return out;
}

double ssim(const Plane& x, const Plane& y, const SsimParams& p) {
  const Plane m = ssim_map(x, y, p);
  double sum = 0.0;
  for (double v : m.values()) sum += v;
  return sum / static_cast<double>(m.size());
}

double ssim(const RasterImage& x, const RasterImage& y, const SsimParams& p) {
  if (!x.same_shape(y)) throw ValidationError("ssim: image shapes differ");
  double sum = 0.0;
  for (int b = 0; b < x.band_count(); ++b) sum += ssim(x.bands[b], y.bands[b], p);
  return sum / x.band_count();
}

}  // namespace pansr::metrics
