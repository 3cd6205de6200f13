#include "pansr/metrics/fsim.hpp"

#include <algorithm>

#include "pansr/error.hpp"
#include "pansr/metrics/filters.hpp"

namespace pansr::metrics {

void FsimParams::validate() const {
  if (!(T1 > 0.0) || !(T2 > 0.0)) throw ValidationError("FSIM constants T1, T2 must be positive");
  pc.validate();
}

double fsim(const Plane& x, const Plane& y, const FsimParams& p) {
  p.validate();
  if (x.width() != y.width() || x.height() != y.height()) throw ValidationError("fsim: image shapes differ");
  const Plane xs = p.prescale ? prescale(x, p.L) : x;
  const Plane ys = p.prescale ? prescale(y, p.L) : y;

  const Plane pc1 = phase_congruency(xs, p.pc);
  const Plane pc2 = phase_congruency(ys, p.pc);
  const Plane g1 = scharr_magnitude(xs);
  const Plane g2 = scharr_magnitude(ys);

  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < pc1.size(); ++i) {
    const double a = pc1.values()[i], b = pc2.values()[i];
    const double ga = g1.values()[i], gb = g2.values()[i];
    const double s_pc = (2.0 * a * b + p.T1) / (a * a + b * b + p.T1);
    const double s_g = (2.0 * ga * gb + p.T2) / (ga * ga + gb * gb + p.T2);
    const double pcm = std::max(a, b);
    num += s_pc * s_g * pcm;
    den += pcm;
  }
  if (den == 0.0) return 1.0;
  return num / den;
}

double fsim(const RasterImage& x, const RasterImage& y, const FsimParams& p) {
  if (!x.same_shape(y)) throw ValidationError("fsim: image shapes differ");
  double sum = 0.0;
  for (int b = 0; b < x.band_count(); ++b) sum += fsim(x.bands[b], y.bands[b], p);
  return sum / x.band_count();
}

}  // namespace pansr::metrics
