#include "pansr/metrics/entropy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "pansr/error.hpp"

namespace pansr::metrics {

double shannon_entropy(const Plane& band) {
  if (band.size() == 0) return 0.0;
  std::array<std::size_t, 256> hist{};
  for (double v : band.values()) {
    const double c = std::clamp(v, 0.0, 255.0);
    const int bin = std::min(255, static_cast<int>(c * (256.0 / 255.0)));
    ++hist[bin];
  }
  const double n = static_cast<double>(band.size());
  double h = 0.0;
  for (auto c : hist) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

namespace {

// Equal-width bin edges over [min, max] of the data, reproducing the edge
// arithmetic start + i * (stop - start) / bins with the last edge pinned.
std::vector<double> bin_edges(std::span<const double> v, int bins) {
  auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  double lo = *lo_it, hi = *hi_it;
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  std::vector<double> edges(bins + 1);
  const double step = (hi - lo) / bins;
  for (int i = 0; i <= bins; ++i) edges[i] = i * step + lo;
  edges[bins] = hi;
  return edges;
}

int bin_of(double v, const std::vector<double>& edges) {
  // Index of the first edge strictly greater than v, minus one; values on the
  // last edge fall into the last bin.
  const int bins = static_cast<int>(edges.size()) - 1;
  if (v == edges.back()) return bins - 1;
  const auto it = std::upper_bound(edges.begin(), edges.end(), v);
  return static_cast<int>(it - edges.begin()) - 1;
}

}  // namespace

double entropy_histogram_similarity(const Plane& x, const Plane& y, int bins) {
  if (x.size() != y.size()) throw ValidationError("entropy histogram: band sizes differ");
  if (bins < 1) throw ValidationError("entropy histogram needs at least one bin");
  if (x.size() == 0) return 0.0;
  const auto ex = bin_edges(x.values(), bins);
  const auto ey = bin_edges(y.values(), bins);
  std::vector<double> hist(static_cast<std::size_t>(bins) * bins, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const int bx = bin_of(x.values()[i], ex);
    const int by = bin_of(y.values()[i], ey);
    if (bx < 0 || bx >= bins || by < 0 || by >= bins) continue;
    hist[static_cast<std::size_t>(bx) * bins + by] += 1.0;
  }
  double sum = 0.0;
  for (double c : hist)
    if (c > 0.0) sum += c * std::log2(c);
  return -sum;
}

}  // namespace pansr::metrics
