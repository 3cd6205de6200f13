#include "pansr/metrics/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "pansr/error.hpp"
#include "pansr/metrics/psnr.hpp"
#include "pansr/parallel.hpp"

namespace pansr::metrics {

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::PSNR: return "PSNR";
    case Metric::SSIM: return "SSIM";
    case Metric::FSIM: return "FSIM";
    case Metric::ISSM: return "ISSM";
  }
  return "?";
}

void MetricParams::validate() const {
  if (!(psnr_L > 0.0)) throw ValidationError("PSNR peak must be positive");
  ssim.validate();
  fsim.validate();
  issm.validate();
}

double MetricValues::get(Metric m) const {
  switch (m) {
    case Metric::PSNR: return psnr;
    case Metric::SSIM: return ssim;
    case Metric::FSIM: return fsim;
    case Metric::ISSM: return issm;
  }
  return 0.0;
}

std::vector<MetricValues> MetricReport::averaged() const {
  std::vector<MetricValues> out(methods.size());
  if (cells.empty()) return out;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    MetricValues s;
    for (const auto& row : cells) {
      s.psnr += row[m].psnr;
      s.ssim += row[m].ssim;
      s.fsim += row[m].fsim;
      s.issm += row[m].issm;
    }
    const double n = static_cast<double>(cells.size());
    out[m] = {s.psnr / n, s.ssim / n, s.fsim / n, s.issm / n};
  }
  return out;
}

void MetricReport::append(const MetricReport& other) {
  if (other.empty()) return;
  if (empty() && cells.empty()) {
    methods = other.methods;
  } else if (methods != other.methods) {
    throw ValidationError("reports cover different methods");
  }
  images.insert(images.end(), other.images.begin(), other.images.end());
  cells.insert(cells.end(), other.cells.begin(), other.cells.end());
}

MetricValues evaluate_pair(const RasterImage& reference, const RasterImage& candidate, const MetricParams& p) {
  if (!reference.same_shape(candidate))
    throw ValidationError("candidate shape " + std::to_string(candidate.width) + "x" +
                          std::to_string(candidate.height) + "x" + std::to_string(candidate.band_count()) +
                          " does not match reference");
  return {psnr(reference, candidate, p.psnr_L), ssim(reference, candidate, p.ssim),
          fsim(reference, candidate, p.fsim), issm(reference, candidate, p.issm)};
}

MetricReport evaluate(const RasterImage& reference, const std::vector<NamedImage>& candidates,
                      const MetricParams& p, std::string image_name) {
  p.validate();
  MetricReport r;
  if (candidates.empty()) return r;
  for (const auto& c : candidates) {
    if (std::find(r.methods.begin(), r.methods.end(), c.name) != r.methods.end())
      throw ValidationError("duplicate method name '" + c.name + "'");
    r.methods.push_back(c.name);
  }
  std::vector<MetricValues> row(candidates.size());
  parallel_for(candidates.size(), [&](std::size_t i) { row[i] = evaluate_pair(reference, candidates[i].image, p); });
  r.images.push_back(std::move(image_name));
  r.cells.push_back(std::move(row));
  return r;
}

ReportFormat parse_report_format(std::string_view s) {
  if (s == "table") return ReportFormat::Table;
  if (s == "json") return ReportFormat::Json;
  if (s == "csv") return ReportFormat::Csv;
  throw ValidationError("unknown report format '" + std::string(s) + "' (expected table, json or csv)");
}

namespace {

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

nlohmann::json jnum(double v) {
  if (std::isfinite(v)) return v;
  return fmt(v);
}

}  // namespace

std::string render_table(const MetricReport& r) {
  if (r.empty()) return "(no candidates)\n";
  const auto avg = r.averaged();
  std::vector<std::vector<std::string>> grid;
  grid.push_back({"Metric"});
  for (const auto& m : r.methods) grid[0].push_back(m);
  for (Metric metric : kAllMetrics) {
    std::vector<std::string> line{std::string(to_string(metric))};
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& v : avg)
      if (!std::isnan(v.get(metric))) best = std::max(best, v.get(metric));
    for (const auto& v : avg) line.push_back(fmt(v.get(metric)) + (v.get(metric) == best ? "*" : " "));
    grid.push_back(std::move(line));
  }
  std::vector<std::size_t> width(grid[0].size(), 0);
  for (const auto& line : grid)
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  std::ostringstream os;
  for (std::size_t l = 0; l < grid.size(); ++l) {
    for (std::size_t c = 0; c < grid[l].size(); ++c) {
      const auto& cell = grid[l][c];
      if (c == 0)
        os << cell << std::string(width[c] - cell.size(), ' ');
      else
        os << "  " << std::string(width[c] - cell.size(), ' ') << cell;
    }
    os << '\n';
    if (l == 0) {
      std::size_t total = width[0];
      for (std::size_t c = 1; c < width.size(); ++c) total += 2 + width[c];
      os << std::string(total, '-') << '\n';
    }
  }
  if (r.images.size() > 1) os << "(mean over " << r.images.size() << " images; * = best)\n";
  else os << "(* = best)\n";
  return os.str();
}

std::string render_json(const MetricReport& r) {
  nlohmann::ordered_json j;
  j["methods"] = r.methods;
  j["metrics"] = nlohmann::json::array();
  for (Metric m : kAllMetrics) j["metrics"].push_back(std::string(to_string(m)));
  const auto avg = r.averaged();
  auto cell_block = [&](const std::vector<MetricValues>& row) {
    nlohmann::ordered_json block = nlohmann::ordered_json::object();
    for (Metric m : kAllMetrics) {
      nlohmann::ordered_json per = nlohmann::ordered_json::object();
      for (std::size_t i = 0; i < r.methods.size(); ++i) per[r.methods[i]] = jnum(row[i].get(m));
      block[std::string(to_string(m))] = std::move(per);
    }
    return block;
  };
  j["values"] = cell_block(avg);
  j["images"] = nlohmann::json::array();
  for (std::size_t k = 0; k < r.images.size(); ++k) {
    nlohmann::ordered_json img;
    img["name"] = r.images[k];
    img["values"] = cell_block(r.cells[k]);
    j["images"].push_back(std::move(img));
  }
  return j.dump(2) + "\n";
}

std::string render_csv(const MetricReport& r) {
  std::ostringstream os;
  os << "metric";
  for (const auto& m : r.methods) os << ',' << m;
  os << '\n';
  if (r.empty()) return os.str();
  const auto avg = r.averaged();
  for (Metric metric : kAllMetrics) {
    os << to_string(metric);
    for (const auto& v : avg) {
      char buf[64];
      const double x = v.get(metric);
      if (std::isfinite(x))
        std::snprintf(buf, sizeof buf, "%.17g", x);
      else
        std::snprintf(buf, sizeof buf, "%s", fmt(x).c_str());
      os << ',' << buf;
    }
    os << '\n';
  }
  return os.str();
}

std::string render(const MetricReport& r, ReportFormat f) {
  switch (f) {
    case ReportFormat::Table: return render_table(r);
    case ReportFormat::Json: return render_json(r);
    case ReportFormat::Csv: return render_csv(r);
  }
  return {};
}

}  // namespace pansr::metrics
