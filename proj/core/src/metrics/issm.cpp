#include "pansr/metrics/issm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pansr/error.hpp"
#include "pansr/metrics/entropy.hpp"

namespace pansr::metrics {

void IssmParams::validate() const {
  if (!(A > 0.0) || !(B > 0.0) || !(C > 0.0)) throw ValidationError("ISSM constants A, B, C must be positive");
  if (!(edge_scale > 0.0)) throw ValidationError("ISSM edge scale must be positive");
  if (histogram_bins < 1) throw ValidationError("ISSM histogram needs at least one bin");
  canny.validate();
  ssim.validate();
}

namespace {

Plane to_8bit(const Plane& band, double scale) {
  Plane out(band.width(), band.height());
  for (std::size_t i = 0; i < band.size(); ++i)
    out.values()[i] = std::trunc(std::clamp(band.values()[i] * scale, 0.0, 255.0));
  return out;
}

}  // namespace

double edge_correlation(const EdgeMap& a, const EdgeMap& b) {
  if (a.edges.size() != b.edges.size()) throw ValidationError("edge maps differ in size");
  const double n = static_cast<double>(a.edges.size());
  if (n == 0) return std::numeric_limits<double>::quiet_NaN();
  // Edge maps hold 0/255 like an 8-bit detector output; the scale cancels but
  // keeps rounding identical to the reference.
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.edges.size(); ++i) {
    ma += a.edges[i] * 255.0;
    mb += b.edges[i] * 255.0;
  }
  ma /= n;
  mb /= n;
  double num = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < a.edges.size(); ++i) {
    const double da = a.edges[i] * 255.0 - ma, db = b.edges[i] * 255.0 - mb;
    num += da * db;
    va += da * da;
    vb += db * db;
  }
  const double den = std::sqrt(va * vb);
  if (den == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return num / den;
}

IssmTerms issm_terms(const Plane& x, const Plane& y, const IssmParams& p) {
  p.validate();
  if (x.width() != y.width() || x.height() != y.height()) throw ValidationError("issm: image shapes differ");
  IssmTerms t;
  t.ehs = entropy_histogram_similarity(x, y, p.histogram_bins);
  t.ec = edge_correlation(canny_edges(to_8bit(x, p.edge_scale), p.canny),
                          canny_edges(to_8bit(y, p.edge_scale), p.canny));
  t.ssim = ssim(x, y, p.ssim);
  const double num = t.ec * t.ehs * (p.A + p.B) + p.e;
  const double den = p.A * t.ec * t.ehs + p.B * t.ehs + p.C * t.ssim + p.e;
  const double v = num / den;
  if (std::isnan(v))
    t.value = 0.0;
  else if (std::isinf(v))
    t.value = v > 0 ? std::numeric_limits<double>::max() : std::numeric_limits<double>::lowest();
  else
    t.value = v;
  return t;
}

double issm(const Plane& x, const Plane& y, const IssmParams& p) { return issm_terms(x, y, p).value; }

double issm(const RasterImage& x, const RasterImage& y, const IssmParams& p) {
  if (!x.same_shape(y)) throw ValidationError("issm: image shapes differ");
  double sum = 0.0;
  for (int b = 0; b < x.band_count(); ++b) sum += issm(x.bands[b], y.bands[b], p);
  return sum / x.band_count();
}

}  // namespace pansr::metrics
