#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "pansr/dataset.hpp"
#include "pansr/error.hpp"
#include "pansr/rng.hpp"

namespace pansr {
namespace {

// Lattice noise with smoothstep interpolation; `cell` is the lattice spacing in pixels.
class ValueNoise {
 public:
  ValueNoise(Rng& rng, int size, int cell) : cell_(cell), n_(size / cell + 2) {
    lattice_.resize(static_cast<std::size_t>(n_) * n_);
    for (double& v : lattice_) v = rng.uniform01();
  }

  double operator()(double x, double y) const {
    const double gx = x / cell_;
    const double gy = y / cell_;
    const int ix = static_cast<int>(gx);
    const int iy = static_cast<int>(gy);
    const double fx = smooth(gx - ix);
    const double fy = smooth(gy - iy);
    const double a = at(ix, iy), b = at(ix + 1, iy);
    const double c = at(ix, iy + 1), d = at(ix + 1, iy + 1);
    return (a + (b - a) * fx) * (1 - fy) + (c + (d - c) * fx) * fy;
  }

 private:
  static double smooth(double t) { return t * t * (3.0 - 2.0 * t); }
  double at(int x, int y) const { return lattice_[static_cast<std::size_t>(y) * n_ + x]; }

  int cell_;
  int n_;
  std::vector<double> lattice_;
};

// R, G, B, NIR reflectance per land-cover class, in 12-bit counts.
constexpr std::array<std::array<double, 4>, 5> kCover = {{
    {420, 610, 380, 2900},    // vegetation
    {1650, 1500, 1250, 1950}, // bare soil
    {260, 420, 560, 180},     // water
    {1850, 1800, 1750, 1900}, // built-up
    {900, 1050, 820, 2300},   // cropland
}};

}  // namespace

SyntheticScene synth_scene(std::uint64_t seed, int lr_size) {
  if (lr_size < 32) throw ValidationError("synthetic scenes need lr_size >= 32");
  const int size = lr_size * kScaleFactor;
  Rng rng(seed);

  struct Wave {
    double kx, ky, phase, amp;
  };
  std::vector<Wave> waves(6);
  for (auto& w : waves) {
    const double theta = rng.uniform(0.0, std::numbers::pi);
    const double wavelength = rng.uniform(6.0, 64.0);
    const double k = 2.0 * std::numbers::pi / wavelength;
    w = {k * std::cos(theta), k * std::sin(theta), rng.uniform(0.0, 2.0 * std::numbers::pi),
         rng.uniform(0.3, 1.0)};
  }
  double amp_sum = 0.0;
  for (const auto& w : waves) amp_sum += w.amp;

  const ValueNoise cover_noise(rng, size, 48);
  const ValueNoise detail_noise(rng, size, 8);

  struct Block {
    int x0, y0, x1, y1, cover;
  };
  std::vector<Block> blocks(static_cast<std::size_t>(size) * size / 3000 + 2);
  for (auto& b : blocks) {
    const int w = 4 + static_cast<int>(rng.uniform_index(24));
    const int h = 4 + static_cast<int>(rng.uniform_index(24));
    b.x0 = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(size)));
    b.y0 = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(size)));
    b.x1 = std::min(size, b.x0 + w);
    b.y1 = std::min(size, b.y0 + h);
    b.cover = rng.uniform_index(3) == 0 ? 2 : 3;
  }

  std::vector<int> cover_map(static_cast<std::size_t>(size) * size);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const double c = cover_noise(x, y);
      cover_map[static_cast<std::size_t>(y) * size + x] =
          c < 0.3 ? 0 : c < 0.45 ? 4 : c < 0.62 ? 1 : c < 0.72 ? 2 : 0;
    }
  for (const auto& b : blocks)
    for (int y = b.y0; y < b.y1; ++y)
      for (int x = b.x0; x < b.x1; ++x) cover_map[static_cast<std::size_t>(y) * size + x] = b.cover;

  std::array<Plane, 4> hr;
  hr.fill(Plane(size, size));
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const int cover = cover_map[static_cast<std::size_t>(y) * size + x];
      double texture = 0.0;
      for (const auto& w : waves) texture += w.amp * std::sin(w.kx * x + w.ky * y + w.phase);
      texture /= amp_sum;  // [-1, 1]
      const double mod = 1.0 + 0.25 * texture + 0.3 * (detail_noise(x, y) - 0.5);
      for (int b = 0; b < 4; ++b) hr[b](x, y) = kCover[cover][b] * mod;
    }
  }

  constexpr std::array<double, 4> kPanWeights = {0.3, 0.3, 0.2, 0.2};
  SyntheticScene scene;
  scene.pan = RasterImage(size, size, {BandRole::PAN});
  scene.pan.pixel_size_m = 0.5;
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      double v = 0.0;
      for (int b = 0; b < 4; ++b) v += kPanWeights[b] * hr[b](x, y);
      scene.pan.bands[0](x, y) = v + 6.0 * rng.normal();
    }
  }
  scene.pan = scene.pan.quantized();

  scene.ms = RasterImage(lr_size, lr_size, default_ms_roles());
  scene.ms.pixel_size_m = 2.0;
  const ResampleSpec down{kScaleFactor, ResampleMethod::Average, -0.5};
  for (int b = 0; b < 4; ++b) {
    scene.ms.bands[b] = resample(hr[b], down, ResampleDirection::Down);
    for (double& v : scene.ms.bands[b].values()) v += 4.0 * rng.normal();
  }
  scene.ms = scene.ms.quantized();
  return scene;
}

}  // namespace pansr
