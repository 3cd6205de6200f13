#include "pansr/metrics/canny.hpp"

#include <algorithm>
#include <cmath>

#include "pansr/error.hpp"
#include "pansr/metrics/filters.hpp"

namespace pansr::metrics {

void CannyParams::validate() const {
  if (!(low >= 0.0) || !(high >= 0.0)) throw ValidationError("Canny thresholds must be non-negative");
}

CannyParams CannyParams::opencv(double low, double high) {
  CannyParams p;
  p.gaussian_sigma = 0.0;
  p.kernel = GradientKernel::Sobel3;
  p.l2_magnitude = false;
  p.relative_thresholds = false;
  p.low = std::floor(low);
  p.high = std::floor(high);
  return p;
}

std::size_t EdgeMap::count() const {
  return static_cast<std::size_t>(std::count(edges.begin(), edges.end(), std::uint8_t{1}));
}

EdgeMap canny_edges(const Plane& band, const CannyParams& p) {
  p.validate();
  const int w = band.width(), h = band.height();
  EdgeMap out{w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h, 0)};
  if (w == 0 || h == 0) return out;

  Plane src = band;
  if (p.gaussian_sigma > 0.0) {
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * p.gaussian_sigma)));
    const auto k = gaussian_kernel(2 * radius + 1, p.gaussian_sigma);
    src = filter_same(band, k, k);
  }
  const Gradient g = p.kernel == GradientKernel::Sobel3 ? sobel3(src) : scharr3(src);

  Plane mag(w, h);
  double max_mag = 0.0;
  for (std::size_t i = 0; i < mag.size(); ++i) {
    const double gx = g.gx.values()[i], gy = g.gy.values()[i];
    const double m = p.l2_magnitude ? std::hypot(gx, gy) : std::abs(gx) + std::abs(gy);
    mag.values()[i] = m;
    max_mag = std::max(max_mag, m);
  }
  double low = p.low, high = p.high;
  if (p.relative_thresholds) {
    low *= max_mag;
    high *= max_mag;
  }
  if (low > high) std::swap(low, high);

  auto m_at = [&](int x, int y) { return (x < 0 || y < 0 || x >= w || y >= h) ? 0.0 : mag(x, y); };

  // 0 = not an edge, 1 = weak candidate, 2 = strong edge.
  std::vector<std::uint8_t> state(out.edges.size(), 0);
  std::vector<std::pair<int, int>> stack;
  // tan(22.5 deg) in 15-bit fixed point; exact comparisons on integer gradients.
  constexpr double kTan22 = 13573.0;
  constexpr double kShift = 32768.0;

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double m = mag(x, y);
      if (!(m > low)) continue;
      const double gx = g.gx(x, y), gy = g.gy(x, y);
      const double ax = std::abs(gx);
      const double ay = std::abs(gy) * kShift;
      const double tg22x = ax * kTan22;
      bool keep;
      if (ay < tg22x) {
        keep = m > m_at(x - 1, y) && m >= m_at(x + 1, y);
      } else if (ay > tg22x + ax * 2.0 * kShift) {
        keep = m > m_at(x, y - 1) && m >= m_at(x, y + 1);
      } else {
        const int s = (gx < 0) != (gy < 0) ? -1 : 1;
        keep = m > m_at(x - s, y - 1) && m > m_at(x + s, y + 1);
      }
      if (!keep) continue;
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (m > high) {
        state[i] = 2;
        stack.emplace_back(x, y);
      } else {
        state[i] = 1;
      }
    }
  }

  while (!stack.empty()) {
    const auto [x, y] = stack.back();
    stack.pop_back();
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = x + dx, ny = y + dy;
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
        if (state[j] == 1) {
          state[j] = 2;
          stack.emplace_back(nx, ny);
        }
      }
  }
  for (std::size_t i = 0; i < state.size(); ++i) out.edges[i] = state[i] == 2 ? 1 : 0;
  return out;
}

}  // namespace pansr::metrics
