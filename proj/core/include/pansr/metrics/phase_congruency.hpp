#pragma once

#include "pansr/raster.hpp"

namespace pansr::metrics {

/// Log-Gabor filter bank and noise model for phase congruency.
struct PhaseCongruencyParams {
  int scales = 4;
  int orientations = 4;
  double min_wavelength = 6.0;
  double mult = 2.0;
  double sigma_onf = 0.55;
  /// Ratio of the angular interval between filters to the angular Gaussian sigma.
  double d_theta_on_sigma = 1.2;
  /// Noise threshold in standard deviations above the mean noise energy.
  double noise_k = 2.0;
  double epsilon = 1e-4;
  double lowpass_cutoff = 0.45;
  int lowpass_order = 15;

  void validate() const;
};

/// Per-pixel phase congruency in [0, 1]: total noise-compensated local energy
/// over all orientations divided by the total filter response amplitude.
/// Filtering runs in the frequency domain (periodic boundary). A band with no
/// non-DC content yields an all-zero map.
Plane phase_congruency(const Plane& band, const PhaseCongruencyParams& p = {});

}  // namespace pansr::metrics
