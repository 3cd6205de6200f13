#pragma once

#include <array>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pansr/metrics/fsim.hpp"
#include "pansr/metrics/issm.hpp"
#include "pansr/metrics/ssim.hpp"
#include "pansr/raster.hpp"

namespace pansr::metrics {

enum class Metric { PSNR, SSIM, FSIM, ISSM };
inline constexpr std::array<Metric, 4> kAllMetrics{Metric::PSNR, Metric::SSIM, Metric::FSIM, Metric::ISSM};
std::string_view to_string(Metric m);

struct MetricParams {
  double psnr_L = kMaxSample12;
  SsimParams ssim;
  FsimParams fsim;
  IssmParams issm;

  void validate() const;
};

struct MetricValues {
  double psnr = 0.0;
  double ssim = 0.0;
  double fsim = 0.0;
  double issm = 0.0;

  double get(Metric m) const;
};

struct NamedImage {
  std::string name;
  RasterImage image;
};

/// Metric values per (image, method). Method order is the candidate order of
/// the first image; every image must supply the same methods.
struct MetricReport {
  std::vector<std::string> methods;
  std::vector<std::string> images;
  std::vector<std::vector<MetricValues>> cells;  // [image][method]

  bool empty() const { return methods.empty(); }
  /// Per-method mean over images (band means are taken first, inside each metric).
  std::vector<MetricValues> averaged() const;
  /// Appends another single-image report; methods must match.
  void append(const MetricReport& other);
};

MetricValues evaluate_pair(const RasterImage& reference, const RasterImage& candidate,
                           const MetricParams& p = {});

/// All four metrics for each candidate against one reference. Candidates are
/// evaluated in parallel; results do not depend on the thread count.
MetricReport evaluate(const RasterImage& reference, const std::vector<NamedImage>& candidates,
                      const MetricParams& p = {}, std::string image_name = "image");

enum class ReportFormat { Table, Json, Csv };
ReportFormat parse_report_format(std::string_view s);

/// Table: metrics as rows, methods as columns, 4 decimals, the best (highest)
/// value in each row marked with '*'. Infinite PSNR prints as "inf".
std::string render_table(const MetricReport& r);
/// JSON with the averaged cells plus per-image cells; infinity is the string "inf".
std::string render_json(const MetricReport& r);
std::string render_csv(const MetricReport& r);
std::string render(const MetricReport& r, ReportFormat f);

}  // namespace pansr::metrics
