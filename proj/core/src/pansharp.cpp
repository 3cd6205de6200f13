#include "pansr/pansharp.hpp"

#include <algorithm>
#include <cmath>

#include "pansr/error.hpp"
#include "pansr/parallel.hpp"
#include "pansr/raster_io.hpp"

namespace pansr {

void SfimParams::validate() const {
  if (ratio < 1) throw ValidationError("SFIM ratio must be >= 1");
  if (kernel_size % 2 == 0 || kernel_size < ratio)
    throw ValidationError("SFIM kernel size must be odd and >= ratio");
  if (!(epsilon > 0.0)) throw ValidationError("SFIM epsilon must be positive");
}

RasterImage sfim(const RasterImage& ms, const RasterImage& pan, const SfimParams& p) {
  p.validate();
  if (pan.band_count() != 1) throw ValidationError("SFIM: PAN must be single-band");
  if (ms.band_count() != 4) throw ValidationError("SFIM: multispectral input must have four bands");
  if (pan.width != ms.width * p.ratio || pan.height != ms.height * p.ratio)
    throw ValidationError("SFIM: PAN is " + std::to_string(pan.width) + "x" +
                          std::to_string(pan.height) + ", expected " +
                          std::to_string(ms.width * p.ratio) + "x" +
                          std::to_string(ms.height * p.ratio));

  const Plane& hr_pan = pan.bands[0];
  const Plane smooth = box_filter(hr_pan, p.kernel_size);
  const double eps = p.epsilon;
  const ResampleSpec up{p.ratio, ResampleMethod::Bicubic, -0.5};

  RasterImage out;
  out.width = pan.width;
  out.height = pan.height;
  out.roles = ms.roles;
  out.domain = ms.domain;
  out.pixel_size_m = pan.pixel_size_m;
  out.passthrough = pan.passthrough;
  out.bands.resize(ms.bands.size());

  parallel_for(ms.bands.size(), [&](std::size_t b) {
    Plane hr = resample(ms.bands[b], up, ResampleDirection::Up);
    auto v = hr.values();
    const auto pv = hr_pan.values();
    const auto sv = smooth.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
      double x = v[i] * pv[i] / (sv[i] + eps);
      if (p.clamp_output) x = std::clamp(x, ms.domain.lo, ms.domain.hi);
      v[i] = x;
    }
    out.bands[b] = std::move(hr);
  });
  return out;
}

void pansharpen_scene(const std::filesystem::path& ms_path, const std::filesystem::path& pan_path,
                      const std::filesystem::path& out_path, const SfimParams& p) {
  const RasterImage ms = read_raster(ms_path);
  const RasterImage pan = read_raster(pan_path);
  if (ms.pixel_size_m && pan.pixel_size_m) {
    const double declared = *ms.pixel_size_m / *pan.pixel_size_m;
    if (std::abs(declared - p.ratio) > 1e-6 * p.ratio)
      throw ValidationError("pixel sizes " + std::to_string(*ms.pixel_size_m) + " m / " +
                            std::to_string(*pan.pixel_size_m) + " m imply ratio " +
                            std::to_string(declared) + ", expected " + std::to_string(p.ratio));
  }
  RasterImage out = sfim(ms, pan, p);
  if (!out.pixel_size_m && ms.pixel_size_m) out.pixel_size_m = *ms.pixel_size_m / p.ratio;
  write_raster(out, out_path);
}

}  // namespace pansr
