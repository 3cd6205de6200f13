#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pansr/pansharp.hpp"
#include "pansr/raster.hpp"

namespace pansr {

inline constexpr int kScaleFactor = 4;

struct TileSpec {
  int hr_tile = 128;
  int lr_tile = 32;
  /// Tile start offsets advance by tile * stride_fraction.
  double stride_fraction = 0.5;
  /// Fraction of pooled pairs assigned to training (rounded up).
  double split_ratio = 0.8;
  std::uint64_t seed = 0;

  void validate() const;
  int lr_stride() const;
  int hr_stride() const { return lr_stride() * kScaleFactor; }
};

enum class Split { Train, Val };
std::string_view to_string(Split s);
Split parse_split(std::string_view name);

struct TilePair {
  std::string scene_id;
  int grid_x = 0;
  int grid_y = 0;
  RasterImage lr;
  RasterImage hr;
  Split split = Split::Train;
};

/// Number of tile starts along one axis: floor((size - tile) / stride) + 1, or
/// 0 when the axis is shorter than one tile. Partial tiles are dropped.
int tile_count(int size, int tile, int stride);

/// Cuts aligned LR/HR tiles. Grid is row-major (grid_y outer); HR offsets are
/// 4x the LR offsets. All pairs are tagged Train until split.
std::vector<TilePair> tile_scene(const RasterImage& lr, const RasterImage& hr, const TileSpec& spec,
                                 const std::string& scene_id = "scene");

/// Indices of the pairs assigned to each split: a seeded Fisher-Yates shuffle
/// of [0, n), first ceil(ratio * n) to train.
struct SplitAssignment {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
};
SplitAssignment split_indices(std::size_t n, double ratio, std::uint64_t seed);

/// Partitions pairs (tags are updated on the returned copies).
std::pair<std::vector<TilePair>, std::vector<TilePair>> split_dataset(std::vector<TilePair> pairs,
                                                                      const TileSpec& spec);

/// One scene of the input list. Either `hr` (already pansharpened) or both
/// `ms` and `pan` must be present; `ms` is always the LR source.
struct SceneEntry {
  std::string id;
  std::filesystem::path ms;
  std::optional<std::filesystem::path> pan;
  std::optional<std::filesystem::path> hr;
};

/// {"scenes": [{"id": ..., "ms": ..., "pan": ...}, ...]}; relative paths are
/// resolved against the list file's directory.
std::vector<SceneEntry> read_scene_list(const std::filesystem::path& path);
void write_scene_list(const std::filesystem::path& path, const std::vector<SceneEntry>& scenes);

struct TileRecord {
  std::string scene_id;
  int grid_x = 0;
  int grid_y = 0;
  std::string lr_path;  // relative to the dataset root
  std::string hr_path;
  Split split = Split::Train;
};

struct DatasetManifest {
  std::filesystem::path root;
  TileSpec spec;
  std::vector<std::string> scene_ids;
  std::vector<TileRecord> records;
  std::size_t train_count = 0;
  std::size_t val_count = 0;
};

inline constexpr const char* kManifestFile = "manifest.jsonl";
inline constexpr const char* kDatasetFile = "dataset.json";

/// Pansharpens scenes without an HR image, tiles every scene, splits the pooled
/// pairs, and writes tiles/ plus manifest.jsonl (one record per line) and
/// dataset.json (spec, seed, counts) under out_dir.
DatasetManifest build_dataset(const std::vector<SceneEntry>& scenes, const TileSpec& spec,
                              const std::filesystem::path& out_dir, const SfimParams& sfim = {});

/// Reads dataset.json + manifest.jsonl and checks counts and file presence.
DatasetManifest load_dataset(const std::filesystem::path& root);

/// Streams pairs in manifest order, optionally restricted to one split.
void for_each_pair(const DatasetManifest& m, std::optional<Split> only,
                   const std::function<void(const TilePair&)>& fn);
std::vector<TilePair> load_pairs(const DatasetManifest& m, std::optional<Split> only = std::nullopt);

struct SyntheticScene {
  RasterImage ms;   // lr_size x lr_size x 4
  RasterImage pan;  // 4*lr_size square, single band
};

/// Procedural stand-in for a multispectral/panchromatic acquisition: land-cover
/// patches with per-band reflectances, modulated by oriented sinusoids and
/// value noise. PAN is a weighted band mean at full resolution; MS is the
/// 4x block average. Deterministic per seed.
SyntheticScene synth_scene(std::uint64_t seed, int lr_size);

}  // namespace pansr
