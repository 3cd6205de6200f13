#include "pansr/nn/inference.hpp"

#include <algorithm>

#include "pansr/error.hpp"
#include "pansr/parallel.hpp"

namespace pansr::nn {

void TileConfig::validate() const {
  if (lr_tile < 1 || up_tile < 1) throw ValidationError("tile size must be >= 1");
  if (lr_overlap < 0 || lr_overlap >= lr_tile) throw ValidationError("LR overlap must lie in [0, tile)");
  if (up_overlap < 0 || up_overlap >= up_tile) throw ValidationError("upsampled overlap must lie in [0, tile)");
}

std::vector<int> tile_starts(int size, int tile, int overlap) {
  if (tile < 1 || overlap < 0 || overlap >= tile) throw ValidationError("tile overlap must lie in [0, tile)");
  if (size <= tile) return {0};
  std::vector<int> starts;
  const int step = tile - overlap;
  int s = 0;
  for (; s + tile < size; s += step) starts.push_back(s);
  starts.push_back(size - tile);
  return starts;
}

std::vector<int> tile_owner(int size, const std::vector<int>& starts, int extent) {
  std::vector<int> owner(size, 0);
  for (int u = 0; u < size; ++u) {
    int best = -1, best_d = -1;
    for (int t = 0; t < static_cast<int>(starts.size()); ++t) {
      const int a = starts[t], b = std::min(size, starts[t] + extent);
      if (u < a || u >= b) continue;
      const int d = std::min(u - a, b - 1 - u);
      if (d > best_d) {
        best_d = d;
        best = t;
      }
    }
    owner[u] = best;
  }
  return owner;
}

Tensor infer_full(const Model& model, const Tensor& lr) { return model.forward_lr(lr); }

namespace {

Tensor crop(const Tensor& t, int x0, int y0, int w, int h) {
  const Shape s = t.shape();
  Tensor out(Shape{1, s.c, h, w});
  for (int c = 0; c < s.c; ++c)
    for (int y = 0; y < h; ++y) std::copy_n(t.data() + t.index(0, c, y0 + y, x0), w, out.data() + out.index(0, c, y, 0));
  return out;
}

}  // namespace

Tensor infer_tiled(const Model& model, const Tensor& lr, const TileConfig& cfg) {
  cfg.validate();
  const Shape s = lr.shape();
  if (s.n != 1) throw ValidationError("tiled inference takes one image at a time");
  const bool pre = model.spec().input == InputConvention::PreUpsampled;
  // Tile in the coordinates the network consumes; `k` maps them to output pixels.
  const Tensor input = pre ? upsample_bicubic(lr) : lr;
  const int in_h = input.shape().h, in_w = input.shape().w;
  const int tile = pre ? cfg.up_tile : cfg.lr_tile;
  const int overlap = pre ? cfg.up_overlap : cfg.lr_overlap;
  const int k = pre ? 1 : kSrScale;

  const auto xs = tile_starts(in_w, tile, overlap);
  const auto ys = tile_starts(in_h, tile, overlap);
  const int tw = std::min(tile, in_w), th = std::min(tile, in_h);
  std::vector<int> xs_out(xs.size()), ys_out(ys.size());
  for (std::size_t i = 0; i < xs.size(); ++i) xs_out[i] = xs[i] * k;
  for (std::size_t i = 0; i < ys.size(); ++i) ys_out[i] = ys[i] * k;
  const int out_w = in_w * k, out_h = in_h * k;
  const auto own_x = tile_owner(out_w, xs_out, tw * k);
  const auto own_y = tile_owner(out_h, ys_out, th * k);

  Tensor out(Shape{1, 4, out_h, out_w});
  parallel_for(xs.size() * ys.size(), [&](std::size_t idx) {
    const int ty = static_cast<int>(idx / xs.size()), tx = static_cast<int>(idx % xs.size());
    const Tensor y = model.forward(crop(input, xs[tx], ys[ty], tw, th));
    const int ox = xs_out[tx], oy = ys_out[ty];
    for (int c = 0; c < 4; ++c)
      for (int v = 0; v < th * k; ++v) {
        if (own_y[oy + v] != ty) continue;
        for (int u = 0; u < tw * k; ++u)
          if (own_x[ox + u] == tx) out.at(0, c, oy + v, ox + u) = y.at(0, c, v, u);
      }
  });
  return out;
}

RasterImage super_resolve(const Model& model, const RasterImage& img, const TileConfig& cfg) {
  if (img.band_count() != 4)
    throw ValidationError("super-resolution needs a 4-band image, got " + std::to_string(img.band_count()) + " bands");
  img.validate(false);
  Tensor y = infer_tiled(model, normalize(img), cfg);
  for (auto& v : y.values()) v = std::clamp(v, 0.0, 1.0);
  RasterImage out = denormalize(y, img.roles, 0, img.domain);
  if (img.pixel_size_m) out.pixel_size_m = *img.pixel_size_m / kSrScale;
  return out;
}

}  // namespace pansr::nn
