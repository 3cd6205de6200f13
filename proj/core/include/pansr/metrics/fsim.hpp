#pragma once

#include "pansr/metrics/phase_congruency.hpp"
#include "pansr/raster.hpp"

namespace pansr::metrics {

struct FsimParams {
  double T1 = 0.85;
  double T2 = 160.0;
  PhaseCongruencyParams pc;
  /// Inputs are mapped from [0, L] to [0, 255] before evaluation so T2 keeps its 8-bit calibration.
  bool prescale = true;
  double L = kMaxSample12;

  void validate() const;
};

/// Feature similarity of two bands. If neither band has any phase congruency
/// the result is 1 (identical absence of features).
double fsim(const Plane& x, const Plane& y, const FsimParams& p = {});

/// Per-band FSIM averaged over bands.
double fsim(const RasterImage& x, const RasterImage& y, const FsimParams& p = {});

}  // namespace pansr::metrics
