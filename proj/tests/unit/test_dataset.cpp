#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "helpers.hpp"
#include "oracles.hpp"
#include "pansr/dataset.hpp"
#include "pansr/error.hpp"
#include "pansr/raster_io.hpp"

using namespace pansr;
using pansr::testing::enumerate_tile_starts;
using pansr::testing::random_image;
using pansr::testing::TempDir;

namespace {

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= a.size();
  mb /= b.size();
  double n = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    n += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  return n / std::sqrt(va * vb);
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("tile counts match start enumeration") {
  Rng rng(1);
  for (int k = 0; k < 200; ++k) {
    const int tile = 1 + static_cast<int>(rng.uniform_index(64));
    const int stride = 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(tile)));
    const int size = static_cast<int>(rng.uniform_index(400));
    CHECK(tile_count(size, tile, stride) == enumerate_tile_starts(size, tile, stride));
  }
  CHECK(tile_count(4000, 128, 64) == 61);
}

TEST_CASE("64x64 LR scene gives 9 aligned pairs") {
  const RasterImage lr = random_image(1, 64, 64);
  const RasterImage hr = random_image(2, 256, 256);
  const auto pairs = tile_scene(lr, hr, TileSpec{}, "s");
  REQUIRE(pairs.size() == 9);
  const int lr_starts[3] = {0, 16, 32};
  for (const auto& p : pairs) {
    CHECK(p.lr.width == 32);
    CHECK(p.hr.width == 128);
    const int lx = lr_starts[p.grid_x], ly = lr_starts[p.grid_y];
    CHECK(p.lr.bands[0](0, 0) == lr.bands[0](lx, ly));
    CHECK(p.hr.bands[0](0, 0) == hr.bands[0](4 * lx, 4 * ly));
    CHECK(p.hr.bands[3](127, 127) == hr.bands[3](4 * lx + 127, 4 * ly + 127));
  }
  CHECK(tile_scene(random_image(3, 32, 32), random_image(4, 128, 128), TileSpec{}).size() == 1);
}

TEST_CASE("tiling errors") {
  CHECK_THROWS_AS(tile_scene(random_image(1, 64, 64), random_image(2, 250, 256), TileSpec{}), ValidationError);
  CHECK_THROWS_AS(tile_scene(random_image(1, 16, 16), random_image(2, 64, 64), TileSpec{}), ValidationError);
  TileSpec bad;
  bad.hr_tile = 100;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  TileSpec bad_split;
  bad_split.split_ratio = 1.0;
  CHECK_THROWS_AS(bad_split.validate(), ValidationError);
}

TEST_CASE("split sizes and determinism") {
  auto a = split_indices(10, 0.8, 5);
  CHECK(a.train.size() == 8);
  CHECK(a.val.size() == 2);
  auto b = split_indices(9, 0.8, 5);
  CHECK(b.train.size() == 8);
  CHECK(b.val.size() == 1);
  auto c = split_indices(18, 0.8, 5);
  CHECK(c.train.size() == 15);
  CHECK(split_indices(10, 0.8, 5).train == a.train);

  std::set<std::size_t> all(c.train.begin(), c.train.end());
  for (auto v : c.val) CHECK(all.insert(v).second);
  CHECK(all.size() == 18);
}

TEST_CASE("synthetic scenes: deterministic, in range, PAN tracks the band mean") {
  const auto a = synth_scene(7, 32);
  const auto b = synth_scene(7, 32);
  for (int k = 0; k < 4; ++k) CHECK(a.ms.bands[k] == b.ms.bands[k]);
  CHECK(a.pan.bands[0] == b.pan.bands[0]);
  CHECK(a.pan.width == 128);
  CHECK_NOTHROW(a.ms.validate());
  CHECK_NOTHROW(a.pan.validate());
  CHECK_THROWS_AS(synth_scene(1, 16), ValidationError);

  for (std::uint64_t s : {1u, 2u, 3u}) {
    const auto sc = synth_scene(s, 48);
    ResampleSpec avg;
    avg.method = ResampleMethod::Average;
    const Plane pan_lr = resample(sc.pan.bands[0], avg, ResampleDirection::Down);
    std::vector<double> x(pan_lr.values().begin(), pan_lr.values().end()), y(x.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      double m = 0;
      for (int k = 0; k < 4; ++k) m += sc.ms.bands[k].values()[i];
      y[i] = m / 4;
    }
    CHECK(pearson(x, y) > 0.9);
  }
}

TEST_CASE("build and load a dataset of two synthetic scenes") {
  TempDir dir("dataset");
  std::vector<SceneEntry> scenes;
  for (int i = 0; i < 2; ++i) {
    const auto sc = synth_scene(100 + i, 64);
    const auto ms = dir / ("s" + std::to_string(i) + "_ms.tif");
    const auto pan = dir / ("s" + std::to_string(i) + "_pan.tif");
    write_raster(sc.ms, ms);
    write_raster(sc.pan, pan);
    scenes.push_back({"s" + std::to_string(i), ms, pan, std::nullopt});
  }
  write_scene_list(dir / "scenes.json", scenes);
  const auto listed = read_scene_list(dir / "scenes.json");
  REQUIRE(listed.size() == 2);
  CHECK(listed[1].ms == scenes[1].ms);

  TileSpec spec;
  spec.seed = 3;
  const auto m = build_dataset(listed, spec, dir / "ds");
  CHECK(m.records.size() == 18);
  CHECK(m.train_count == 15);
  CHECK(m.val_count == 3);
  CHECK(m.scene_ids == std::vector<std::string>{"s0", "s1"});

  const auto loaded = load_dataset(dir / "ds");
  CHECK(loaded.records.size() == 18);
  CHECK(loaded.train_count == 15);
  const auto pairs = load_pairs(loaded);
  REQUIRE(pairs.size() == 18);
  for (const auto& p : pairs) {
    // Alignment: the x4 block mean of the HR tile tracks the LR tile per band.
    ResampleSpec avg;
    avg.method = ResampleMethod::Average;
    for (int b = 0; b < 4; ++b) {
      const Plane down = resample(p.hr.bands[b], avg, ResampleDirection::Down);
      double mh = 0, ml = 0;
      for (double v : down.values()) mh += v;
      for (double v : p.lr.bands[b].values()) ml += v;
      CHECK(std::abs(mh - ml) / ml < 0.02);
    }
  }
  CHECK(load_pairs(loaded, Split::Val).size() == 3);

  // Same inputs and seed reproduce the manifest byte for byte.
  const auto m2 = build_dataset(listed, spec, dir / "ds2");
  std::ifstream f1(dir / "ds" / kManifestFile), f2(dir / "ds2" / kManifestFile);
  const std::string s1((std::istreambuf_iterator<char>(f1)), {}), s2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(s1 == s2);

  std::filesystem::remove(dir / "ds" / loaded.records[4].hr_path);
  CHECK_THROWS_AS(load_dataset(dir / "ds"), ValidationError);
  CHECK_THROWS_AS(build_dataset({}, spec, dir / "empty"), ValidationError);
}

TEST_CASE("missing scene files are reported") {
  TempDir dir("dataset");
  std::vector<SceneEntry> scenes{{"x", dir / "nope_ms.tif", dir / "nope_pan.tif", std::nullopt}};
  CHECK_THROWS(build_dataset(scenes, TileSpec{}, dir / "ds"));
}

}  // TEST_SUITE
