#include "pansr/nn/layers.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <string>

#include "pansr/error.hpp"

namespace pansr::nn {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapM = Eigen::Map<RowMatrix>;
using MapCM = Eigen::Map<const RowMatrix>;

int out_extent(int size, int stride) { return (size + stride - 1) / stride; }

// Column matrix for replicate-padded, "same" cross-correlation:
// col[(c * k + ky) * k + kx][oy * wo + ox] = x[c][clamp(oy * s + ky - k/2)][clamp(ox * s + kx - k/2)].
void im2col(const double* x, int c, int h, int w, int k, int s, RowMatrix& col) {
  const int ho = out_extent(h, s), wo = out_extent(w, s), p = k / 2;
  col.resize(static_cast<Eigen::Index>(c) * k * k, static_cast<Eigen::Index>(ho) * wo);
  for (int ch = 0; ch < c; ++ch) {
    const double* plane = x + static_cast<std::size_t>(ch) * h * w;
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        double* row = col.data() + ((static_cast<std::size_t>(ch) * k + ky) * k + kx) * col.cols();
        for (int oy = 0; oy < ho; ++oy) {
          const int sy = std::clamp(oy * s + ky - p, 0, h - 1);
          const double* src = plane + static_cast<std::size_t>(sy) * w;
          double* dst = row + static_cast<std::size_t>(oy) * wo;
          if (s == 1 && kx - p >= 0 && kx - p + w - 1 < w) {
            std::copy_n(src, w, dst);
            continue;
          }
          for (int ox = 0; ox < wo; ++ox) dst[ox] = src[std::clamp(ox * s + kx - p, 0, w - 1)];
        }
      }
  }
}

// Adjoint of im2col: scatters column gradients back to (clamped) source pixels.
void col2im(const RowMatrix& col, int c, int h, int w, int k, int s, double* gx) {
  const int ho = out_extent(h, s), wo = out_extent(w, s), p = k / 2;
  std::fill_n(gx, static_cast<std::size_t>(c) * h * w, 0.0);
  for (int ch = 0; ch < c; ++ch) {
    double* plane = gx + static_cast<std::size_t>(ch) * h * w;
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        const double* row = col.data() + ((static_cast<std::size_t>(ch) * k + ky) * k + kx) * col.cols();
        for (int oy = 0; oy < ho; ++oy) {
          const int sy = std::clamp(oy * s + ky - p, 0, h - 1);
          double* dst = plane + static_cast<std::size_t>(sy) * w;
          const double* src = row + static_cast<std::size_t>(oy) * wo;
          for (int ox = 0; ox < wo; ++ox) dst[std::clamp(ox * s + kx - p, 0, w - 1)] += src[ox];
        }
      }
  }
}

// Conv primitives on one sample. Weight is (o, c*k*k) row-major.
void conv_fwd(const double* x, int c, int h, int w, const double* weight, const double* bias, int o, int k, int s,
              double* y) {
  RowMatrix col;
  im2col(x, c, h, w, k, s, col);
  MapCM W(weight, o, col.rows());
  MapM Y(y, o, col.cols());
  Y.noalias() = W * col;
  if (bias)
    for (int i = 0; i < o; ++i) Y.row(i).array() += bias[i];
}

// Given gy for a conv with input x, accumulates dW, db and writes dx.
void conv_bwd(const double* x, int c, int h, int w, const double* weight, int o, int k, int s, const double* gy,
              double* gx, double* gw, double* gb) {
  RowMatrix col;
  im2col(x, c, h, w, k, s, col);
  MapCM G(gy, o, col.cols());
  if (gw) {
    MapM GW(gw, o, col.rows());
    GW.noalias() += G * col.transpose();
  }
  if (gb)
    for (int i = 0; i < o; ++i) gb[i] += G.row(i).sum();
  if (gx) {
    MapCM W(weight, o, col.rows());
    RowMatrix gcol = W.transpose() * G;
    col2im(gcol, c, h, w, k, s, gx);
  }
}

// Input gradient of a conv mapping (c, h, w) -> (o, ho, wo), i.e. the conv's
// adjoint applied to g. Used as the forward pass of transposed_conv.
void conv_adjoint(const double* g, int o, int c, int h, int w, const double* weight, int k, int s, double* out) {
  const int ho = out_extent(h, s), wo = out_extent(w, s);
  MapCM G(g, o, static_cast<Eigen::Index>(ho) * wo);
  MapCM W(weight, o, static_cast<Eigen::Index>(c) * k * k);
  RowMatrix gcol = W.transpose() * G;
  col2im(gcol, c, h, w, k, s, out);
}

// Weight gradient of the adjoint: d/dW <gy, adjoint_W(x)> = d/dW <conv_W(gy), x>
// with conv input gy, so it is the conv weight gradient with x playing the
// output-gradient role.
void conv_adjoint_wgrad(const double* x, int o, const double* gy, int c, int h, int w, int k, int s, double* gw) {
  RowMatrix col;
  im2col(gy, c, h, w, k, s, col);
  MapCM X(x, o, col.cols());
  MapM GW(gw, o, col.rows());
  GW.noalias() += X * col.transpose();
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError(msg);
}

}  // namespace

std::string_view to_string(LayerKind k) {
  switch (k) {
    case LayerKind::Conv: return "conv";
    case LayerKind::TransposedConv: return "transposed_conv";
    case LayerKind::MaxPool: return "maxpool";
    case LayerKind::UpsampleNearest: return "upsample_nearest";
    case LayerKind::PixelShuffle: return "pixel_shuffle";
    case LayerKind::PReLU: return "prelu";
    case LayerKind::ReLU: return "relu";
    case LayerKind::AddSkip: return "add_skip";
  }
  return "?";
}

LayerKind parse_layer_kind(std::string_view s) {
  for (auto k : {LayerKind::Conv, LayerKind::TransposedConv, LayerKind::MaxPool, LayerKind::UpsampleNearest,
                 LayerKind::PixelShuffle, LayerKind::PReLU, LayerKind::ReLU, LayerKind::AddSkip})
    if (to_string(k) == s) return k;
  throw ValidationError("unknown layer kind '" + std::string(s) + "'");
}

Shape layer_output_shape(const LayerSpec& l, const Shape& in) {
  const std::string name(to_string(l.kind));
  require(in.n >= 1 && in.c >= 1 && in.h >= 1 && in.w >= 1, name + ": empty input " + in.str());
  switch (l.kind) {
    case LayerKind::Conv:
      require(l.kernel >= 1 && l.kernel % 2 == 1, name + ": kernel must be odd, got " + std::to_string(l.kernel));
      require(l.out_channels >= 1, name + ": needs at least one output channel");
      require(l.stride >= 1, name + ": stride must be >= 1");
      return {in.n, l.out_channels, out_extent(in.h, l.stride), out_extent(in.w, l.stride)};
    case LayerKind::TransposedConv:
      require(l.kernel >= 1 && l.kernel % 2 == 1, name + ": kernel must be odd, got " + std::to_string(l.kernel));
      require(l.out_channels >= 1, name + ": needs at least one output channel");
      require(l.stride == 1, name + ": only stride 1 is supported");
      return {in.n, l.out_channels, in.h, in.w};
    case LayerKind::MaxPool:
      require(l.factor >= 2, name + ": window must be >= 2");
      require(in.h >= l.factor && in.w >= l.factor, name + ": input " + in.str() + " smaller than window");
      return {in.n, in.c, in.h / l.factor, in.w / l.factor};
    case LayerKind::UpsampleNearest:
      require(l.factor >= 2, name + ": factor must be >= 2");
      return {in.n, in.c, in.h * l.factor, in.w * l.factor};
    case LayerKind::PixelShuffle: {
      const int r2 = l.factor * l.factor;
      require(l.factor >= 2, name + ": ratio must be >= 2");
      require(in.c % r2 == 0, name + ": channel count " + std::to_string(in.c) + " not divisible by " +
                                  std::to_string(r2));
      return {in.n, in.c / r2, in.h * l.factor, in.w * l.factor};
    }
    case LayerKind::PReLU:
    case LayerKind::ReLU:
    case LayerKind::AddSkip:
      return in;
  }
  return in;
}

std::vector<Shape> layer_param_shapes(const LayerSpec& l, const Shape& in) {
  switch (l.kind) {
    case LayerKind::Conv:
      return {{l.out_channels, in.c, l.kernel, l.kernel}, {1, l.out_channels, 1, 1}};
    case LayerKind::TransposedConv:
      return {{in.c, l.out_channels, l.kernel, l.kernel}, {1, l.out_channels, 1, 1}};
    case LayerKind::PReLU:
      return {{1, in.c, 1, 1}};
    default:
      return {};
  }
}

int layer_fan_in(const LayerSpec& l, const Shape& in) {
  switch (l.kind) {
    case LayerKind::Conv:
    case LayerKind::TransposedConv:
      return in.c * l.kernel * l.kernel;
    default:
      return 0;
  }
}

Tensor layer_forward(const LayerSpec& l, const Tensor& x, std::span<const Tensor> params, const Tensor* skip) {
  const Shape in = x.shape();
  const Shape out = layer_output_shape(l, in);
  Tensor y(out);
  switch (l.kind) {
    case LayerKind::Conv:
      for (int n = 0; n < in.n; ++n)
        conv_fwd(x.sample_ptr(n), in.c, in.h, in.w, params[0].data(), params[1].data(), out.c, l.kernel, l.stride,
                 y.sample_ptr(n));
      break;
    case LayerKind::TransposedConv:
      // Weight (in, out, k, k) is the weight of the mirror conv out -> in.
      for (int n = 0; n < in.n; ++n) {
        conv_adjoint(x.sample_ptr(n), in.c, out.c, out.h, out.w, params[0].data(), l.kernel, 1, y.sample_ptr(n));
        double* yp = y.sample_ptr(n);
        for (int c = 0; c < out.c; ++c)
          for (std::size_t i = 0; i < out.plane(); ++i) yp[c * out.plane() + i] += params[1][c];
      }
      break;
    case LayerKind::MaxPool: {
      const int f = l.factor;
      for (int n = 0; n < in.n; ++n)
        for (int c = 0; c < in.c; ++c)
          for (int oy = 0; oy < out.h; ++oy)
            for (int ox = 0; ox < out.w; ++ox) {
              double m = x.at(n, c, oy * f, ox * f);
              for (int dy = 0; dy < f; ++dy)
                for (int dx = 0; dx < f; ++dx) m = std::max(m, x.at(n, c, oy * f + dy, ox * f + dx));
              y.at(n, c, oy, ox) = m;
            }
      break;
    }
    case LayerKind::UpsampleNearest: {
      const int f = l.factor;
      for (int n = 0; n < in.n; ++n)
        for (int c = 0; c < in.c; ++c)
          for (int oy = 0; oy < out.h; ++oy)
            for (int ox = 0; ox < out.w; ++ox) y.at(n, c, oy, ox) = x.at(n, c, oy / f, ox / f);
      break;
    }
    case LayerKind::PixelShuffle: {
      const int r = l.factor;
      for (int n = 0; n < in.n; ++n)
        for (int c = 0; c < out.c; ++c)
          for (int oy = 0; oy < out.h; ++oy)
            for (int ox = 0; ox < out.w; ++ox)
              y.at(n, c, oy, ox) = x.at(n, c * r * r + (oy % r) * r + (ox % r), oy / r, ox / r);
      break;
    }
    case LayerKind::PReLU:
      for (int n = 0; n < in.n; ++n)
        for (int c = 0; c < in.c; ++c) {
          const double a = params[0][c];
          const double* xp = x.sample_ptr(n) + c * in.plane();
          double* yp = y.sample_ptr(n) + c * in.plane();
          for (std::size_t i = 0; i < in.plane(); ++i) yp[i] = xp[i] > 0.0 ? xp[i] : a * xp[i];
        }
      break;
    case LayerKind::ReLU:
      for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
      break;
    case LayerKind::AddSkip:
      require(skip != nullptr, "add_skip: missing skip tensor");
      require(skip->shape() == in, "add_skip: skip shape " + skip->shape().str() + " does not match " + in.str());
      for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + (*skip)[i];
      break;
  }
  return y;
}

void layer_backward(const LayerSpec& l, const Tensor& x, std::span<const Tensor> params, const Tensor& gy,
                    Tensor& gx, std::span<Tensor> gparams) {
  const Shape in = x.shape();
  const Shape out = layer_output_shape(l, in);
  require(gy.shape() == out, std::string(to_string(l.kind)) + ": output gradient shape " + gy.shape().str() +
                                 " does not match " + out.str());
  gx = Tensor(in);
  switch (l.kind) {
    case LayerKind::Conv:
      for (int n = 0; n < in.n; ++n)
        conv_bwd(x.sample_ptr(n), in.c, in.h, in.w, params[0].data(), out.c, l.kernel, l.stride, gy.sample_ptr(n),
                 gx.sample_ptr(n), gparams[0].data(), gparams[1].data());
      break;
    case LayerKind::TransposedConv:
      for (int n = 0; n < in.n; ++n) {
        // Forward is the adjoint of the mirror conv, so its input gradient is
        // that conv applied to gy.
        conv_fwd(gy.sample_ptr(n), out.c, out.h, out.w, params[0].data(), nullptr, in.c, l.kernel, 1,
                 gx.sample_ptr(n));
        conv_adjoint_wgrad(x.sample_ptr(n), in.c, gy.sample_ptr(n), out.c, out.h, out.w, l.kernel, 1,
                           gparams[0].data());
        const double* g = gy.sample_ptr(n);
        for (int c = 0; c < out.c; ++c) {
          double s = 0.0;
          for (std::size_t i = 0; i < out.plane(); ++i) s += g[c * out.plane() + i];
          gparams[1][c] += s;
        }
      }
      break;
    case LayerKind::MaxPool: {
      // Gradient goes to the first maximum in row-major window order.
      const int f = l.factor;
      for (int n = 0; n < in.n; ++n)
        for (int c = 0; c < in.c; ++c)
          for (int oy = 0; oy < out.h; ++oy)
            for (int ox = 0; ox < out.w; ++ox) {
              int by = oy * f, bx = ox * f;
              double m = x.at(n, c, by, bx);
              for (int dy = 0; dy < f; ++dy)
                for (int dx = 0; dx < f; ++dx)
                  if (x.at(n, c, oy * f + dy, ox * f + dx) > m) {
                    m = x.at(n, c, oy * f + dy, ox * f + dx);
                    by = oy * f + dy;
                    bx = ox * f + dx;
                  }
              gx.at(n, c, by, bx) += gy.at(n, c, oy, ox);
            }
      break;
    }
    case LayerKind::UpsampleNearest: {
      const int f = l.factor;
      for (int n = 0; n < in.n; ++n)
        for (int c = 0; c < in.c; ++c)
          for (int oy = 0; oy < out.h; ++oy)
            for (int ox = 0; ox < out.w; ++ox) gx.at(n, c, oy / f, ox / f) += gy.at(n, c, oy, ox);
      break;
    }
    case LayerKind::PixelShuffle: {
      const int r = l.factor;
      for (int n = 0; n < in.n; ++n)
        for (int c = 0; c < out.c; ++c)
          for (int oy = 0; oy < out.h; ++oy)
            for (int ox = 0; ox < out.w; ++ox)
              gx.at(n, c * r * r + (oy % r) * r + (ox % r), oy / r, ox / r) = gy.at(n, c, oy, ox);
      break;
    }
    case LayerKind::PReLU:
      for (int n = 0; n < in.n; ++n)
        for (int c = 0; c < in.c; ++c) {
          const double a = params[0][c];
          const double* xp = x.sample_ptr(n) + c * in.plane();
          const double* gp = gy.sample_ptr(n) + c * in.plane();
          double* gxp = gx.sample_ptr(n) + c * in.plane();
          double ga = 0.0;
          for (std::size_t i = 0; i < in.plane(); ++i) {
            if (xp[i] > 0.0) {
              gxp[i] = gp[i];
            } else {
              gxp[i] = a * gp[i];
              ga += xp[i] * gp[i];
            }
          }
          gparams[0][c] += ga;
        }
      break;
    case LayerKind::ReLU:
      for (std::size_t i = 0; i < x.size(); ++i) gx[i] = x[i] > 0.0 ? gy[i] : 0.0;
      break;
    case LayerKind::AddSkip:
      std::copy_n(gy.data(), gy.size(), gx.data());
      break;
  }
}

}  // namespace pansr::nn
