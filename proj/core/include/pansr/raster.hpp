#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pansr/nn/tensor.hpp"

namespace pansr {

/// Largest value of a 12-bit analytic product.
inline constexpr double kMaxSample12 = 4095.0;

enum class BandRole { R, G, B, NIR, PAN };

std::string_view to_string(BandRole role);
BandRole parse_band_role(std::string_view name);

/// Default band order for a 4-band multispectral product.
std::vector<BandRole> default_ms_roles();

struct SampleDomain {
  double lo = 0.0;
  double hi = kMaxSample12;

  bool contains(double v) const { return v >= lo && v <= hi; }
  bool operator==(const SampleDomain&) const = default;
};

/// Single band stored row-major in double precision.
class Plane {
 public:
  Plane() = default;
  Plane(int width, int height, double fill = 0.0);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  double operator()(int x, int y) const {
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }

  /// Border-replicated access for coordinates outside the plane.
  double clamped(int x, int y) const;

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  bool operator==(const Plane&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

/// TIFF tag carried through read/write untouched (geolocation and GDAL metadata).
struct PassthroughTag {
  std::uint16_t id = 0;
  std::uint16_t type = 0;
  std::uint32_t count = 0;
  std::vector<std::uint8_t> bytes;  // little-endian element encoding

  bool operator==(const PassthroughTag&) const = default;
};

/// width x height x bands grid of samples in a bounded domain.
///
/// Invariants (checked by validate()): all planes share width/height, every
/// sample lies in `domain`, roles has one entry per band, a PAN image has one
/// band and a multispectral image has four.
struct RasterImage {
  int width = 0;
  int height = 0;
  std::vector<Plane> bands;
  std::vector<BandRole> roles;
  SampleDomain domain;
  std::optional<double> pixel_size_m;
  std::vector<PassthroughTag> passthrough;

  RasterImage() = default;
  RasterImage(int width, int height, std::vector<BandRole> roles, double fill = 0.0);

  int band_count() const { return static_cast<int>(bands.size()); }
  bool is_pan() const { return roles.size() == 1 && roles[0] == BandRole::PAN; }

  /// Throws ValidationError on shape/role problems; when check_range is set,
  /// also on samples outside the domain.
  void validate(bool check_range = true) const;

  /// Copy with samples clamped into the domain.
  RasterImage clamped() const;

  /// Copy with samples rounded half away from zero and clamped.
  RasterImage quantized() const;

  bool same_shape(const RasterImage& other) const {
    return width == other.width && height == other.height &&
           band_count() == other.band_count();
  }
};

enum class ResampleMethod { Bicubic, Nearest, Average };
enum class ResampleDirection { Up, Down };

std::string_view to_string(ResampleMethod m);
ResampleMethod parse_resample_method(std::string_view name);

struct ResampleSpec {
  int factor = 4;
  ResampleMethod method = ResampleMethod::Bicubic;
  /// Cubic convolution sharpness; -0.5 is the Keys / Catmull-Rom kernel.
  double bicubic_a = -0.5;

  void validate() const;
};

/// Keys cubic convolution kernel.
double cubic_kernel(double t, double a);

/// Up: output pixel centre i maps to input coordinate (i + 0.5) / f - 0.5.
/// Down: output pixel centre i maps to input coordinate (i + 0.5) * f - 0.5;
/// Average-down takes exact f x f block means. Average-up behaves as nearest.
/// Borders replicate. Values are not clamped.
Plane resample(const Plane& band, const ResampleSpec& spec, ResampleDirection dir);
RasterImage resample(const RasterImage& img, const ResampleSpec& spec, ResampleDirection dir);

/// Sub-image [x0, x0 + w) x [y0, y0 + h); must lie inside img.
RasterImage crop(const RasterImage& img, int x0, int y0, int w, int h);

/// k x k moving average with border replication; k must be odd.
Plane box_filter(const Plane& band, int k);

/// Samples scaled by 1/domain.hi into a (1, bands, h, w) tensor.
nn::Tensor normalize(const RasterImage& img);

/// Inverse of normalize for sample n of t: multiply by domain.hi, clamp, round.
RasterImage denormalize(const nn::Tensor& t, std::vector<BandRole> roles, int n = 0,
                        SampleDomain domain = {});

}  // namespace pansr
