#include "pansr/metrics/phase_congruency.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <vector>

#include <fftw3.h>

#include "pansr/error.hpp"

namespace pansr::metrics {
namespace {

using cplx = std::complex<double>;

// FFTW planning is not thread-safe; execution with new-array functions is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class Fft2d {
 public:
  Fft2d(int rows, int cols) : n_(static_cast<std::size_t>(rows) * cols) {
    in_ = fftw_alloc_complex(n_);
    out_ = fftw_alloc_complex(n_);
    std::lock_guard lock(planner_mutex());
    fwd_ = fftw_plan_dft_2d(rows, cols, in_, out_, FFTW_FORWARD, FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_2d(rows, cols, in_, out_, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~Fft2d() {
    {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(fwd_);
      fftw_destroy_plan(inv_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }
  Fft2d(const Fft2d&) = delete;
  Fft2d& operator=(const Fft2d&) = delete;

  std::vector<cplx> forward(const std::vector<cplx>& x) { return run(fwd_, x, 1.0); }
  /// Normalized inverse (divides by the element count).
  std::vector<cplx> inverse(const std::vector<cplx>& x) { return run(inv_, x, 1.0 / n_); }

 private:
  std::vector<cplx> run(fftw_plan plan, const std::vector<cplx>& x, double scale) {
    for (std::size_t i = 0; i < n_; ++i) {
      in_[i][0] = x[i].real();
      in_[i][1] = x[i].imag();
    }
    fftw_execute(plan);
    std::vector<cplx> y(n_);
    for (std::size_t i = 0; i < n_; ++i) y[i] = cplx(out_[i][0] * scale, out_[i][1] * scale);
    return y;
  }

  std::size_t n_;
  fftw_complex* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan fwd_ = nullptr;
  fftw_plan inv_ = nullptr;
};

// Frequency coordinate of FFT bin i (origin at bin 0, already ifftshift-ed).
double freq(int i, int n) {
  const int shifted = (i + n / 2) % n;  // position in the centred grid
  if (n % 2) return (shifted - (n - 1) / 2.0) / (n - 1);
  return (shifted - n / 2.0) / n;
}

double median(std::vector<double> v) {
  const std::size_t n = v.size();
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n / 2), v.end());
  const double hi = v[n / 2];
  if (n % 2) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n / 2));
  return 0.5 * (lo + hi);
}

}  // namespace

void PhaseCongruencyParams::validate() const {
  if (scales < 1 || orientations < 1) throw ValidationError("phase congruency needs >= 1 scale and orientation");
  if (!(min_wavelength > 0.0) || !(mult > 0.0) || !(sigma_onf > 0.0 && sigma_onf < 1.0))
    throw ValidationError("invalid log-Gabor parameters");
}

Plane phase_congruency(const Plane& band, const PhaseCongruencyParams& p) {
  p.validate();
  const int rows = band.height();
  const int cols = band.width();
  const std::size_t n = static_cast<std::size_t>(rows) * cols;
  if (n == 0) return band;

  Fft2d fft(rows, cols);
  std::vector<cplx> img(n);
  for (std::size_t i = 0; i < n; ++i) img[i] = band.values()[i];
  const std::vector<cplx> spectrum = fft.forward(img);

  std::vector<double> radius(n), sin_t(n), cos_t(n), lowpass(n);
  for (int r = 0; r < rows; ++r) {
    const double fy = freq(r, rows);
    for (int c = 0; c < cols; ++c) {
      const double fx = freq(c, cols);
      const std::size_t i = static_cast<std::size_t>(r) * cols + c;
      radius[i] = std::sqrt(fx * fx + fy * fy);
      const double theta = std::atan2(-fy, fx);
      sin_t[i] = std::sin(theta);
      cos_t[i] = std::cos(theta);
      lowpass[i] = 1.0 / (1.0 + std::pow(radius[i] / p.lowpass_cutoff, 2.0 * p.lowpass_order));
    }
  }
  radius[0] = 1.0;

  std::vector<std::vector<double>> log_gabor(p.scales, std::vector<double>(n));
  const double log_sigma = std::log(p.sigma_onf);
  for (int s = 0; s < p.scales; ++s) {
    const double fo = 1.0 / (p.min_wavelength * std::pow(p.mult, s));
    for (std::size_t i = 0; i < n; ++i) {
      const double l = std::log(radius[i] / fo);
      log_gabor[s][i] = std::exp(-(l * l) / (2.0 * log_sigma * log_sigma)) * lowpass[i];
    }
    log_gabor[s][0] = 0.0;
  }

  const double theta_sigma = std::numbers::pi / p.orientations / p.d_theta_on_sigma;
  std::vector<double> energy_all(n, 0.0), amp_all(n, 0.0);
  std::vector<cplx> filtered(n);

  for (int o = 0; o < p.orientations; ++o) {
    const double angle = o * std::numbers::pi / p.orientations;
    const double ca = std::cos(angle), sa = std::sin(angle);
    std::vector<double> spread(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double ds = sin_t[i] * ca - cos_t[i] * sa;
      const double dc = cos_t[i] * ca + sin_t[i] * sa;
      const double dtheta = std::abs(std::atan2(ds, dc));
      spread[i] = std::exp(-(dtheta * dtheta) / (2.0 * theta_sigma * theta_sigma));
    }

    std::vector<std::vector<cplx>> eo(p.scales);
    std::vector<std::vector<double>> filter_spatial(p.scales);
    std::vector<double> sum_e(n, 0.0), sum_o(n, 0.0), sum_an(n, 0.0);
    double em_n = 0.0;
    for (int s = 0; s < p.scales; ++s) {
      std::vector<cplx> filt(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double f = log_gabor[s][i] * spread[i];
        filt[i] = f;
        filtered[i] = spectrum[i] * f;
        if (s == 0) em_n += f * f;
      }
      eo[s] = fft.inverse(filtered);
      const auto spatial = fft.inverse(filt);
      filter_spatial[s].resize(n);
      const double root_n = std::sqrt(static_cast<double>(n));
      for (std::size_t i = 0; i < n; ++i) filter_spatial[s][i] = spatial[i].real() * root_n;
      for (std::size_t i = 0; i < n; ++i) {
        sum_an[i] += std::abs(eo[s][i]);
        sum_e[i] += eo[s][i].real();
        sum_o[i] += eo[s][i].imag();
      }
    }

    std::vector<double> energy(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double x_energy = std::hypot(sum_e[i], sum_o[i]) + p.epsilon;
      const double mean_e = sum_e[i] / x_energy;
      const double mean_o = sum_o[i] / x_energy;
      for (int s = 0; s < p.scales; ++s) {
        const double e = eo[s][i].real(), od = eo[s][i].imag();
        energy[i] += e * mean_e + od * mean_o - std::abs(e * mean_o - od * mean_e);
      }
    }

    // Noise level from the median response power of the smallest scale.
    std::vector<double> power(n);
    for (std::size_t i = 0; i < n; ++i) power[i] = std::norm(eo[0][i]);
    const double mean_e2n = -median(std::move(power)) / std::log(0.5);
    const double noise_power = em_n > 0.0 ? mean_e2n / em_n : 0.0;

    double sum_an2 = 0.0, sum_aiaj = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (int s = 0; s < p.scales; ++s) sum_an2 += filter_spatial[s][i] * filter_spatial[s][i];
      for (int si = 0; si + 1 < p.scales; ++si)
        for (int sj = si + 1; sj < p.scales; ++sj)
          sum_aiaj += filter_spatial[si][i] * filter_spatial[sj][i];
    }
    const double est_noise_energy2 = 2.0 * noise_power * sum_an2 + 4.0 * noise_power * sum_aiaj;
    const double tau = std::sqrt(std::max(0.0, est_noise_energy2) / 2.0);
    const double est_noise_energy = tau * std::sqrt(std::numbers::pi / 2.0);
    const double est_noise_sigma = std::sqrt((2.0 - std::numbers::pi / 2.0) * tau * tau);
    const double threshold = (est_noise_energy + p.noise_k * est_noise_sigma) / 1.7;

    for (std::size_t i = 0; i < n; ++i) {
      energy_all[i] += std::max(energy[i] - threshold, 0.0);
      amp_all[i] += sum_an[i];
    }
  }

  // Amplitudes this small come from FFT round-off on featureless input.
  double scale_ref = 0.0;
  for (double v : band.values()) scale_ref = std::max(scale_ref, std::abs(v));
  const double floor = 1e-9 * std::max(1.0, scale_ref);

  Plane out(cols, rows);
  auto ov = out.values();
  for (std::size_t i = 0; i < n; ++i)
    ov[i] = amp_all[i] > floor ? std::clamp(energy_all[i] / amp_all[i], 0.0, 1.0) : 0.0;
  return out;
}

}  // namespace pansr::metrics
