#pragma once

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <string>

#include "pansr/raster.hpp"
#include "pansr/rng.hpp"

namespace pansr::testing {

inline Plane random_plane(Rng& rng, int w, int h, double lo = 0.0, double hi = 4095.0) {
  Plane p(w, h);
  for (auto& v : p.values()) v = rng.uniform(lo, hi);
  return p;
}

/// Integer samples in [0, 4095]; 4 bands unless `bands` is 1 (then PAN).
inline RasterImage random_image(std::uint64_t seed, int w, int h, int bands = 4) {
  Rng rng(seed);
  RasterImage img(w, h, bands == 1 ? std::vector<BandRole>{BandRole::PAN} : default_ms_roles());
  for (auto& b : img.bands)
    for (auto& v : b.values()) v = static_cast<double>(rng.uniform_index(4096));
  return img;
}

/// Smooth texture plus seeded noise, useful where pure noise is degenerate.
inline RasterImage textured_image(std::uint64_t seed, int w, int h) {
  Rng rng(seed);
  RasterImage img(w, h, default_ms_roles());
  for (int b = 0; b < 4; ++b) {
    const double fx = rng.uniform(0.05, 0.4), fy = rng.uniform(0.05, 0.4), ph = rng.uniform(0.0, 6.28);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        img.bands[b](x, y) = 2000.0 + 900.0 * std::sin(fx * x + ph) * std::cos(fy * y) + rng.uniform(-150.0, 150.0);
  }
  return img.quantized();
}

inline RasterImage with_noise(const RasterImage& img, double sigma, std::uint64_t seed) {
  Rng rng(seed);
  RasterImage out = img;
  for (auto& b : out.bands)
    for (auto& v : b.values()) v += sigma * rng.normal();
  return out.quantized();
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("pansr_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace pansr::testing
