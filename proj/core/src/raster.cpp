#include "pansr/raster.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "pansr/error.hpp"

namespace pansr {

std::string_view to_string(BandRole role) {
  switch (role) {
    case BandRole::R: return "R";
    case BandRole::G: return "G";
    case BandRole::B: return "B";
    case BandRole::NIR: return "NIR";
    case BandRole::PAN: return "PAN";
  }
  return "?";
}

BandRole parse_band_role(std::string_view name) {
  if (name == "R") return BandRole::R;
  if (name == "G") return BandRole::G;
  if (name == "B") return BandRole::B;
  if (name == "NIR") return BandRole::NIR;
  if (name == "PAN") return BandRole::PAN;
  throw ValidationError("unknown band role '" + std::string(name) + "'");
}

std::vector<BandRole> default_ms_roles() {
  return {BandRole::R, BandRole::G, BandRole::B, BandRole::NIR};
}

Plane::Plane(int width, int height, double fill) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw ValidationError("negative plane dimensions");
  data_.assign(static_cast<std::size_t>(width) * height, fill);
}

double Plane::clamped(int x, int y) const {
  x = std::clamp(x, 0, width_ - 1);
  y = std::clamp(y, 0, height_ - 1);
  return data_[static_cast<std::size_t>(y) * width_ + x];
}

RasterImage::RasterImage(int w, int h, std::vector<BandRole> r, double fill)
    : width(w), height(h), roles(std::move(r)) {
  bands.assign(roles.size(), Plane(w, h, fill));
}

void RasterImage::validate(bool check_range) const {
  if (width <= 0 || height <= 0) throw ValidationError("raster has empty dimensions");
  if (bands.size() != roles.size())
    throw ValidationError("raster has " + std::to_string(bands.size()) + " bands but " +
                          std::to_string(roles.size()) + " band roles");
  const bool has_pan = std::find(roles.begin(), roles.end(), BandRole::PAN) != roles.end();
  if (has_pan && bands.size() != 1)
    throw ValidationError("a PAN image must have exactly one band");
  if (!has_pan && bands.size() != 4)
    throw ValidationError("a multispectral image must have exactly four bands, got " +
                          std::to_string(bands.size()));
  for (const auto& b : bands) {
    if (b.width() != width || b.height() != height)
      throw ValidationError("band plane dimensions differ from raster dimensions");
  }
  if (!check_range) return;
  for (const auto& b : bands) {
    for (double v : b.values()) {
      if (!domain.contains(v))
        throw ValidationError("sample " + std::to_string(v) + " outside sample domain [" +
                              std::to_string(domain.lo) + ", " + std::to_string(domain.hi) +
                              "]");
    }
  }
}

RasterImage RasterImage::clamped() const {
  RasterImage out = *this;
  for (auto& b : out.bands)
    for (double& v : b.values()) v = std::clamp(v, domain.lo, domain.hi);
  return out;
}

RasterImage RasterImage::quantized() const {
  RasterImage out = *this;
  for (auto& b : out.bands)
    for (double& v : b.values()) v = std::clamp(std::round(v), domain.lo, domain.hi);
  return out;
}

std::string_view to_string(ResampleMethod m) {
  switch (m) {
    case ResampleMethod::Bicubic: return "bicubic";
    case ResampleMethod::Nearest: return "nearest";
    case ResampleMethod::Average: return "average";
  }
  return "?";
}

ResampleMethod parse_resample_method(std::string_view name) {
  if (name == "bicubic") return ResampleMethod::Bicubic;
  if (name == "nearest") return ResampleMethod::Nearest;
  if (name == "average") return ResampleMethod::Average;
  throw ValidationError("unknown resample method '" + std::string(name) + "'");
}

void ResampleSpec::validate() const {
  if (factor < 1) throw ValidationError("resample factor must be >= 1");
  if (!(bicubic_a < 0.0)) throw ValidationError("bicubic_a must be negative");
}

double cubic_kernel(double t, double a) {
  t = std::abs(t);
  if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
  if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
  return 0.0;
}

namespace {

struct Taps {
  std::array<int, 4> index;
  std::array<double, 4> weight;
};

// Four cubic taps per output position along one axis.
std::vector<Taps> cubic_taps(int in_size, int out_size, double scale_in_per_out, double a) {
  std::vector<Taps> taps(out_size);
  for (int i = 0; i < out_size; ++i) {
    const double u = (i + 0.5) * scale_in_per_out - 0.5;
    const int base = static_cast<int>(std::floor(u));
    for (int t = 0; t < 4; ++t) {
      const int m = base - 1 + t;
      taps[i].index[t] = std::clamp(m, 0, in_size - 1);
      taps[i].weight[t] = cubic_kernel(u - m, a);
    }
  }
  return taps;
}

Plane bicubic(const Plane& in, int out_w, int out_h, double sx, double sy, double a) {
  const auto tx = cubic_taps(in.width(), out_w, sx, a);
  const auto ty = cubic_taps(in.height(), out_h, sy, a);
  Plane tmp(out_w, in.height());
  for (int y = 0; y < in.height(); ++y) {
    for (int x = 0; x < out_w; ++x) {
      const Taps& t = tx[x];
      double acc = 0.0;
      for (int k = 0; k < 4; ++k) acc += t.weight[k] * in(t.index[k], y);
      tmp(x, y) = acc;
    }
  }
  Plane out(out_w, out_h);
  for (int y = 0; y < out_h; ++y) {
    const Taps& t = ty[y];
    for (int x = 0; x < out_w; ++x) {
      double acc = 0.0;
      for (int k = 0; k < 4; ++k) acc += t.weight[k] * tmp(x, t.index[k]);
      out(x, y) = acc;
    }
  }
  return out;
}

}  // namespace

Plane resample(const Plane& band, const ResampleSpec& spec, ResampleDirection dir) {
  if (spec.factor == 0) throw ValidationError("resample factor must be positive");
  spec.validate();
  const int f = spec.factor;
  if (band.width() == 0 || band.height() == 0) throw ValidationError("resample of empty plane");

  if (dir == ResampleDirection::Down &&
      (band.width() % f != 0 || band.height() % f != 0))
    throw ValidationError("dimensions " + std::to_string(band.width()) + "x" +
                          std::to_string(band.height()) + " not divisible by factor " +
                          std::to_string(f));
  if (f == 1) return band;

  const bool up = dir == ResampleDirection::Up;
  const int out_w = up ? band.width() * f : band.width() / f;
  const int out_h = up ? band.height() * f : band.height() / f;

  switch (spec.method) {
    case ResampleMethod::Bicubic: {
      const double s = up ? 1.0 / f : static_cast<double>(f);
      return bicubic(band, out_w, out_h, s, s, spec.bicubic_a);
    }
    case ResampleMethod::Average:
      if (!up) {
        Plane out(out_w, out_h);
        const double inv = 1.0 / (static_cast<double>(f) * f);
        for (int y = 0; y < out_h; ++y)
          for (int x = 0; x < out_w; ++x) {
            double acc = 0.0;
            for (int dy = 0; dy < f; ++dy)
              for (int dx = 0; dx < f; ++dx) acc += band(x * f + dx, y * f + dy);
            out(x, y) = acc * inv;
          }
        return out;
      }
      [[fallthrough]];
    case ResampleMethod::Nearest: {
      // The nearest source centre to (i + 0.5) / f - 0.5 is floor((i + 0.5) / f) when
      // upsampling; when downsampling the centre (i + 0.5) * f - 0.5 ties for even f
      // and resolves upward to i * f + f / 2.
      Plane out(out_w, out_h);
      auto src = [&](int i) { return up ? i / f : i * f + f / 2; };
      for (int y = 0; y < out_h; ++y)
        for (int x = 0; x < out_w; ++x) out(x, y) = band(src(x), src(y));
      return out;
    }
  }
  return {};
}

RasterImage resample(const RasterImage& img, const ResampleSpec& spec, ResampleDirection dir) {
  RasterImage out;
  out.roles = img.roles;
  out.domain = img.domain;
  out.passthrough = img.passthrough;
  out.bands.reserve(img.bands.size());
  for (const auto& b : img.bands) out.bands.push_back(resample(b, spec, dir));
  out.width = out.bands.empty() ? 0 : out.bands.front().width();
  out.height = out.bands.empty() ? 0 : out.bands.front().height();
  if (img.pixel_size_m) {
    out.pixel_size_m = dir == ResampleDirection::Up ? *img.pixel_size_m / spec.factor
                                                    : *img.pixel_size_m * spec.factor;
  }
  return out;
}

RasterImage crop(const RasterImage& img, int x0, int y0, int w, int h) {
  if (x0 < 0 || y0 < 0 || w <= 0 || h <= 0 || x0 + w > img.width || y0 + h > img.height)
    throw ValidationError("crop window outside raster");
  RasterImage out;
  out.width = w;
  out.height = h;
  out.roles = img.roles;
  out.domain = img.domain;
  out.pixel_size_m = img.pixel_size_m;
  out.bands.reserve(img.bands.size());
  for (const auto& b : img.bands) {
    Plane p(w, h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) p(x, y) = b(x0 + x, y0 + y);
    out.bands.push_back(std::move(p));
  }
  return out;
}

Plane box_filter(const Plane& band, int k) {
  if (k < 1 || k % 2 == 0)
    throw ValidationError("box filter size must be odd and >= 1, got " + std::to_string(k));
  if (k == 1) return band;
  const int r = k / 2;
  const double inv = 1.0 / (static_cast<double>(k) * k);
  Plane out(band.width(), band.height());
  for (int y = 0; y < band.height(); ++y) {
    for (int x = 0; x < band.width(); ++x) {
      double acc = 0.0;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) acc += band.clamped(x + dx, y + dy);
      out(x, y) = acc * inv;
    }
  }
  return out;
}

nn::Tensor normalize(const RasterImage& img) {
  nn::Tensor t(nn::Shape{1, img.band_count(), img.height, img.width});
  const double scale = 1.0 / img.domain.hi;
  double* dst = t.data();
  for (const auto& b : img.bands)
    for (double v : b.values()) *dst++ = v * scale;
  return t;
}

RasterImage denormalize(const nn::Tensor& t, std::vector<BandRole> roles, int n,
                        SampleDomain domain) {
  const nn::Shape& s = t.shape();
  if (static_cast<int>(roles.size()) != s.c)
    throw ValidationError("denormalize: role count does not match channel count");
  RasterImage img(s.w, s.h, std::move(roles));
  img.domain = domain;
  const double* src = t.sample_ptr(n);
  for (auto& b : img.bands)
    for (double& v : b.values()) v = std::clamp(std::round(*src++ * domain.hi), domain.lo, domain.hi);
  return img;
}

}  // namespace pansr
