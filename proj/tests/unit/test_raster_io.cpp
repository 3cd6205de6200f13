#include <doctest.h>

#include <cstring>
#include <fstream>

#include "helpers.hpp"
#include "pansr/error.hpp"
#include "pansr/raster_io.hpp"

using namespace pansr;
using pansr::testing::random_image;
using pansr::testing::TempDir;

namespace {

std::vector<std::uint8_t> slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

// Minimal big-endian single-strip TIFF writer, independent of the library's.
void write_be_tiff(const std::filesystem::path& p, int w, int h, int spp, const std::vector<std::uint16_t>& samples) {
  std::vector<std::uint8_t> b;
  auto u16 = [&](std::uint16_t v) {
    b.push_back(v >> 8);
    b.push_back(v & 0xff);
  };
  auto u32 = [&](std::uint32_t v) {
    for (int i = 3; i >= 0; --i) b.push_back((v >> (8 * i)) & 0xff);
  };
  b = {'M', 'M'};
  u16(42);
  const std::uint32_t data_off = 8;
  const std::uint32_t data_len = static_cast<std::uint32_t>(samples.size() * 2);
  const std::uint32_t bps_off = data_off + data_len;
  const std::uint32_t ifd_off = bps_off + 8;
  u32(ifd_off);
  for (auto s : samples) u16(s);
  for (int i = 0; i < 4; ++i) u16(16);
  const int n_tags = 9;
  u16(n_tags);
  auto tag = [&](std::uint16_t id, std::uint16_t type, std::uint32_t count, std::uint32_t value) {
    u16(id);
    u16(type);
    u32(count);
    if (type == 3 && count == 1) {
      u16(static_cast<std::uint16_t>(value));
      u16(0);
    } else {
      u32(value);
    }
  };
  tag(256, 3, 1, w);
  tag(257, 3, 1, h);
  if (spp == 1)
    tag(258, 3, 1, 16);
  else
    tag(258, 3, spp, bps_off);
  tag(259, 3, 1, 1);
  tag(262, 3, 1, 1);
  tag(273, 4, 1, data_off);
  tag(277, 3, 1, spp);
  tag(278, 3, 1, h);
  tag(279, 4, 1, data_len);
  u32(0);
  std::ofstream(p, std::ios::binary).write(reinterpret_cast<const char*>(b.data()), b.size());
}

}  // namespace

TEST_SUITE("raster_io") {

TEST_CASE("write then read reproduces samples and metadata") {
  TempDir dir("io");
  for (std::uint64_t s = 0; s < 6; ++s) {
    RasterImage img = random_image(s, 17 + static_cast<int>(s), 9 + static_cast<int>(s) * 3, s % 2 ? 1 : 4);
    img.pixel_size_m = s % 2 ? 0.5 : 2.0;
    if (s % 3 == 0 && !img.is_pan()) img.roles = {BandRole::NIR, BandRole::R, BandRole::G, BandRole::B};
    if (img.is_pan()) img.roles = {BandRole::PAN};
    const auto path = dir / ("img" + std::to_string(s) + ".tif");
    write_raster(img, path);
    const RasterImage back = read_raster(path);
    CHECK(back.width == img.width);
    CHECK(back.height == img.height);
    CHECK(back.roles == img.roles);
    REQUIRE(back.pixel_size_m.has_value());
    CHECK(*back.pixel_size_m == *img.pixel_size_m);
    for (int b = 0; b < img.band_count(); ++b) CHECK(back.bands[b] == img.bands[b]);
  }
}

TEST_CASE("writing quantizes floating samples") {
  TempDir dir("io");
  RasterImage img(3, 1, {BandRole::PAN});
  img.bands[0](0, 0) = 4095.7;
  img.bands[0](1, 0) = 10.5;
  img.bands[0](2, 0) = 10.49;
  write_raster(img, dir / "q.tif");
  const RasterImage back = read_raster(dir / "q.tif");
  CHECK(back.bands[0](0, 0) == 4095.0);
  CHECK(back.bands[0](1, 0) == 11.0);
  CHECK(back.bands[0](2, 0) == 10.0);
}

TEST_CASE("big-endian files read, 4096 is rejected, 3 bands are rejected") {
  TempDir dir("io");
  std::vector<std::uint16_t> s(4 * 3 * 2);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = static_cast<std::uint16_t>(i * 170);
  write_be_tiff(dir / "be.tif", 3, 2, 4, s);
  const RasterImage img = read_raster(dir / "be.tif");
  CHECK(img.band_count() == 4);
  CHECK(img.roles == default_ms_roles());
  CHECK(img.bands[1](0, 0) == 170.0);
  CHECK(img.bands[3](2, 1) == 23.0 * 170.0);

  s[5] = 4096;
  write_be_tiff(dir / "hot.tif", 3, 2, 4, s);
  try {
    read_raster(dir / "hot.tif");
    FAIL("expected a domain error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("sample out of 12-bit domain") != std::string::npos);
  }

  std::vector<std::uint16_t> s3(3 * 4, 7);
  write_be_tiff(dir / "three.tif", 2, 2, 3, s3);
  CHECK_THROWS_AS(read_raster(dir / "three.tif"), ValidationError);
}

TEST_CASE("single-band file with PAN sidecar") {
  TempDir dir("io");
  std::vector<std::uint16_t> s(5 * 4, 1000);
  write_be_tiff(dir / "p.tif", 5, 4, 1, s);
  write_sidecar(dir / "p.tif", RasterSidecar{{BandRole::PAN}, 0.5});
  const RasterImage img = read_raster(dir / "p.tif");
  CHECK(img.is_pan());
  CHECK(img.pixel_size_m.value() == 0.5);
}

TEST_CASE("unreadable and malformed files fail cleanly") {
  TempDir dir("io");
  CHECK_THROWS_AS(read_raster(dir / "missing.tif"), IoError);
  std::ofstream(dir / "junk.tif") << "not a tiff";
  CHECK_THROWS_AS(read_raster(dir / "junk.tif"), ValidationError);
}

TEST_CASE("geotags survive a read-write cycle byte for byte") {
  TempDir dir("io");
  RasterImage img = random_image(4, 6, 5);
  img.pixel_size_m = 2.0;
  PassthroughTag scale{33550, 12, 3, {}};
  const double v[3] = {2.0, 2.0, 0.0};
  scale.bytes.resize(24);
  std::memcpy(scale.bytes.data(), v, 24);
  PassthroughTag ascii{34737, 2, 6, {'W', 'G', 'S', '8', '4', 0}};
  img.passthrough = {scale, ascii};
  write_raster(img, dir / "g.tif");
  const RasterImage back = read_raster(dir / "g.tif");
  CHECK(back.passthrough == img.passthrough);
  write_raster(back, dir / "g2.tif");
  CHECK(slurp(dir / "g.tif") == slurp(dir / "g2.tif"));
}

}  // TEST_SUITE
