#pragma once

// Integer-only image corpus shared with tests/oracle/issm_oracle.py. Any
// change here must be mirrored there and the fixture regenerated.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "pansr/raster.hpp"

namespace pansr::testing {

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  std::int64_t below(std::int64_t n) { return static_cast<std::int64_t>(next() % static_cast<std::uint64_t>(n)); }

 private:
  std::uint64_t state_;
};

// [y][x][band] integer samples.
struct IntImage {
  int size = 64;
  int bands = 4;
  std::vector<std::int64_t> v;
  std::int64_t& at(int y, int x, int b) { return v[(static_cast<std::size_t>(y) * size + x) * bands + b]; }
  std::int64_t at(int y, int x, int b) const { return v[(static_cast<std::size_t>(y) * size + x) * bands + b]; }

  RasterImage to_raster() const {
    RasterImage img(size, size, default_ms_roles());
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x)
        for (int b = 0; b < bands; ++b) img.bands[b](x, y) = static_cast<double>(at(y, x, b));
    return img;
  }
};

inline void clip12(IntImage& img) {
  for (auto& s : img.v) s = std::clamp<std::int64_t>(s, 0, 4095);
}

inline IntImage textured(std::uint64_t seed, int size = 64) {
  SplitMix64 r(seed);
  IntImage img{size, 4, std::vector<std::int64_t>(static_cast<std::size_t>(size) * size * 4)};
  for (int b = 0; b < 4; ++b) {
    const std::int64_t level = 500 + r.below(2500);
    const std::int64_t gx = r.below(9) - 4;
    const std::int64_t gy = r.below(9) - 4;
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) img.at(y, x, b) = level + gx * x + gy * y;
  }
  for (int k = 0; k < 6; ++k) {
    const int x0 = static_cast<int>(r.below(size));
    const int y0 = static_cast<int>(r.below(size));
    const int rw = 4 + static_cast<int>(r.below(24));
    const int rh = 4 + static_cast<int>(r.below(24));
    const std::int64_t delta = r.below(2401) - 1200;
    for (int b = 0; b < 4; ++b) {
      const std::int64_t d = delta + r.below(201) - 100;
      for (int y = y0; y < std::min(size, y0 + rh); ++y)
        for (int x = x0; x < std::min(size, x0 + rw); ++x) img.at(y, x, b) += d;
    }
  }
  clip12(img);
  return img;
}

inline IntImage add_noise(const IntImage& src, std::int64_t amp, std::uint64_t seed) {
  SplitMix64 r(seed);
  IntImage out = src;
  for (auto& s : out.v) s += r.below(2 * amp + 1) - amp;
  clip12(out);
  return out;
}

inline IntImage box_blur3(const IntImage& src) {
  IntImage out = src;
  const int n = src.size;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      for (int b = 0; b < src.bands; ++b) {
        std::int64_t s = 0;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx)
            s += src.at(std::clamp(y + dy, 0, n - 1), std::clamp(x + dx, 0, n - 1), b);
        out.at(y, x, b) = s / 9;
      }
  return out;
}

inline std::uint64_t checksum(const IntImage& img) {
  constexpr std::uint64_t kMod = (1ull << 61) - 1;
  unsigned __int128 acc = 0;
  for (std::size_t i = 0; i < img.v.size(); ++i)
    acc = (acc * 1000003u + static_cast<std::uint64_t>(img.v[i]) + i) % kMod;
  return static_cast<std::uint64_t>(acc);
}

struct CorpusPair {
  std::string name;
  IntImage reference;
  IntImage candidate;
};

inline std::vector<CorpusPair> issm_corpus() {
  std::vector<CorpusPair> pairs;
  for (int i = 0; i < 17; ++i) {
    IntImage ref = textured(1000 + i);
    IntImage cand;
    switch (i % 4) {
      case 0: cand = add_noise(ref, 30 + 20 * i, 5000 + i); break;
      case 1: cand = box_blur3(ref); break;
      case 2: cand = add_noise(box_blur3(ref), 60, 5000 + i); break;
      default: cand = i == 3 ? ref : add_noise(ref, 400, 5000 + i); break;
    }
    char name[16];
    std::snprintf(name, sizeof name, "pair%02d", i);
    pairs.push_back({name, std::move(ref), std::move(cand)});
  }
  const IntImage ref = textured(77);
  const int amps[3] = {40, 160, 640};
  for (int j = 0; j < 3; ++j) pairs.push_back({"degrade" + std::to_string(j), ref, add_noise(ref, amps[j], 9000)});
  return pairs;
}

}  // namespace pansr::testing
