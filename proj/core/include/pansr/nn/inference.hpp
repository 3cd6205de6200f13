#pragma once

#include <vector>

#include "pansr/nn/model.hpp"
#include "pansr/raster.hpp"

namespace pansr::nn {

struct TileConfig {
  /// Native-LR networks: tile side and overlap in LR pixels.
  int lr_tile = 32;
  int lr_overlap = 8;
  /// Pre-upsampled networks: tile side and overlap in upsampled pixels.
  int up_tile = 128;
  int up_overlap = 32;

  void validate() const;
};

/// Tile starts covering [0, size): stride tile - overlap, the last tile
/// aligned to the end. A single start 0 when size <= tile.
std::vector<int> tile_starts(int size, int tile, int overlap);

/// For every output coordinate, the index of the tile (along one axis) whose
/// edge is farthest from it; ties go to the lower index. Tiles span
/// [start, start + extent) clipped to `size`.
std::vector<int> tile_owner(int size, const std::vector<int>& starts, int extent);

/// Single pass over the whole input: (1, 4, h, w) normalized LR -> (1, 4, 4h, 4w).
Tensor infer_full(const Model& model, const Tensor& lr);

/// Tiled inference with centre-preferring stitching. Tiles run in parallel;
/// every output pixel is written by exactly one tile.
Tensor infer_tiled(const Model& model, const Tensor& lr, const TileConfig& cfg = {});

/// x4 super-resolution of a 4-band image: normalize, tiled inference, clamp to
/// [0, 1], denormalize to the input domain. Roles carry over; pixel size is
/// divided by 4; passthrough tags are dropped since the grid changes.
RasterImage super_resolve(const Model& model, const RasterImage& img, const TileConfig& cfg = {});

}  // namespace pansr::nn
