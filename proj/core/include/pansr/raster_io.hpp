#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "pansr/raster.hpp"

namespace pansr {

/// Band metadata stored next to a raster as `<file>.json`:
/// {"band_order": ["R","G","B","NIR"], "pixel_size_m": 2.0}
struct RasterSidecar {
  std::vector<BandRole> band_order;
  std::optional<double> pixel_size_m;
};

std::filesystem::path sidecar_path(const std::filesystem::path& raster);
std::optional<RasterSidecar> read_sidecar(const std::filesystem::path& raster);
void write_sidecar(const std::filesystem::path& raster, const RasterSidecar& sidecar);

/// Reads a baseline TIFF (uncompressed, striped, 16-bit unsigned, contiguous,
/// 1 or 4 samples per pixel). Band roles and pixel size come from the sidecar,
/// then from the embedded ImageDescription, then from defaults. Samples above
/// 4095 are rejected.
RasterImage read_raster(const std::filesystem::path& path);

/// Writes samples rounded half away from zero and clamped to the domain. Band
/// roles and pixel size are embedded in ImageDescription; passthrough tags are
/// written back unchanged.
void write_raster(const RasterImage& img, const std::filesystem::path& path);

}  // namespace pansr
