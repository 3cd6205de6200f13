#pragma once

#include <filesystem>

#include "pansr/raster.hpp"

namespace pansr {

/// Smoothing filter-based intensity modulation settings.
struct SfimParams {
  int ratio = 4;
  /// Odd box window applied to PAN; 7 covers a 4-pixel LR footprint around any HR pixel.
  int kernel_size = 7;
  /// Added to the smoothed PAN, in sample units.
  double epsilon = 1e-6;
  bool clamp_output = true;

  void validate() const;
};

/// HR_b = bicubic_up(ms_b) * pan / (box(pan) + epsilon), per band, in double precision.
/// Output keeps the band order and roles of `ms` and the pixel size of `pan`.
RasterImage sfim(const RasterImage& ms, const RasterImage& pan, const SfimParams& p = {});

/// File-level wrapper: reads both inputs, checks that any declared pixel sizes
/// agree with the dimension ratio, fuses, writes the result.
void pansharpen_scene(const std::filesystem::path& ms_path, const std::filesystem::path& pan_path,
                      const std::filesystem::path& out_path, const SfimParams& p = {});

}  // namespace pansr
