#include "pansr/metrics/filters.hpp"

#include <cmath>

#include "pansr/error.hpp"

namespace pansr::metrics {

Plane prescale(const Plane& band, double max_value, double target) {
  Plane out = band;
  const double s = target / max_value;
  for (double& v : out.values()) v *= s;
  return out;
}

std::vector<double> gaussian_kernel(int size, double sigma) {
  if (size < 1 || !(sigma > 0.0)) throw ValidationError("invalid Gaussian window");
  std::vector<double> k(size);
  const double c = (size - 1) / 2.0;
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    k[i] = std::exp(-(i - c) * (i - c) / (2.0 * sigma * sigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

Plane filter_valid(const Plane& p, std::span<const double> kx, std::span<const double> ky) {
  const int ow = p.width() - static_cast<int>(kx.size()) + 1;
  const int oh = p.height() - static_cast<int>(ky.size()) + 1;
  if (ow < 1 || oh < 1) throw ValidationError("image smaller than filter window");
  Plane tmp(ow, p.height());
  for (int y = 0; y < p.height(); ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t i = 0; i < kx.size(); ++i) acc += kx[i] * p(x + static_cast<int>(i), y);
      tmp(x, y) = acc;
    }
  Plane out(ow, oh);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t i = 0; i < ky.size(); ++i) acc += ky[i] * tmp(x, y + static_cast<int>(i));
      out(x, y) = acc;
    }
  return out;
}

Plane filter_same(const Plane& p, std::span<const double> kx, std::span<const double> ky) {
  const int rx = static_cast<int>(kx.size()) / 2;
  const int ry = static_cast<int>(ky.size()) / 2;
  Plane tmp(p.width(), p.height());
  for (int y = 0; y < p.height(); ++y)
    for (int x = 0; x < p.width(); ++x) {
      double acc = 0.0;
      for (std::size_t i = 0; i < kx.size(); ++i)
        acc += kx[i] * p.clamped(x + static_cast<int>(i) - rx, y);
      tmp(x, y) = acc;
    }
  Plane out(p.width(), p.height());
  for (int y = 0; y < p.height(); ++y)
    for (int x = 0; x < p.width(); ++x) {
      double acc = 0.0;
      for (std::size_t i = 0; i < ky.size(); ++i)
        acc += ky[i] * tmp.clamped(x, y + static_cast<int>(i) - ry);
      out(x, y) = acc;
    }
  return out;
}

namespace {

Gradient derivative3(const Plane& p, double side, double centre) {
  const double smooth[3] = {side, centre, side};
  const double diff[3] = {-1.0, 0.0, 1.0};
  return {filter_same(p, diff, smooth), filter_same(p, smooth, diff)};
}

}  // namespace

Gradient sobel3(const Plane& p) { return derivative3(p, 1.0, 2.0); }
Gradient scharr3(const Plane& p) { return derivative3(p, 3.0, 10.0); }

Plane scharr_magnitude(const Plane& p) {
  Gradient g = scharr3(p);
  Plane out(p.width(), p.height());
  auto gx = g.gx.values();
  auto gy = g.gy.values();
  auto o = out.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = std::hypot(gx[i], gy[i]) / 16.0;
  return out;
}

}  // namespace pansr::metrics
