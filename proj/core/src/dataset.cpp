#include "pansr/dataset.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pansr/error.hpp"
#include "pansr/parallel.hpp"
#include "pansr/raster_io.hpp"
#include "pansr/rng.hpp"

namespace pansr {
namespace fs = std::filesystem;
using json = nlohmann::json;

void TileSpec::validate() const {
  if (lr_tile < 1) throw ValidationError("lr_tile must be positive");
  if (hr_tile != lr_tile * kScaleFactor)
    throw ValidationError("hr_tile (" + std::to_string(hr_tile) + ") must equal 4 x lr_tile (" +
                          std::to_string(lr_tile) + ")");
  if (!(stride_fraction > 0.0 && stride_fraction <= 1.0))
    throw ValidationError("stride fraction must lie in (0, 1]");
  if (!(split_ratio > 0.0 && split_ratio < 1.0))
    throw ValidationError("split ratio must lie in (0, 1)");
  lr_stride();
}

int TileSpec::lr_stride() const {
  const double s = lr_tile * stride_fraction;
  const double r = std::round(s);
  if (std::abs(s - r) > 1e-9 || r < 1.0)
    throw ValidationError("lr_tile x stride_fraction must be a positive whole number of pixels");
  return static_cast<int>(r);
}

std::string_view to_string(Split s) { return s == Split::Train ? "train" : "val"; }

Split parse_split(std::string_view name) {
  if (name == "train") return Split::Train;
  if (name == "val") return Split::Val;
  throw ValidationError("unknown split '" + std::string(name) + "'");
}

int tile_count(int size, int tile, int stride) {
  if (tile <= 0 || stride <= 0) throw ValidationError("tile and stride must be positive");
  if (size < tile) return 0;
  return (size - tile) / stride + 1;
}

std::vector<TilePair> tile_scene(const RasterImage& lr, const RasterImage& hr, const TileSpec& spec,
                                 const std::string& scene_id) {
  spec.validate();
  if (hr.width != lr.width * kScaleFactor || hr.height != lr.height * kScaleFactor)
    throw ValidationError("HR image must be exactly 4x the LR image dimensions");
  if (lr.band_count() != hr.band_count())
    throw ValidationError("LR and HR band counts differ");
  if (lr.width < spec.lr_tile || lr.height < spec.lr_tile)
    throw ValidationError("scene '" + scene_id + "' is smaller than one tile");

  const int stride = spec.lr_stride();
  const int nx = tile_count(lr.width, spec.lr_tile, stride);
  const int ny = tile_count(lr.height, spec.lr_tile, stride);
  std::vector<TilePair> out;
  out.reserve(static_cast<std::size_t>(nx) * ny);
  for (int gy = 0; gy < ny; ++gy) {
    for (int gx = 0; gx < nx; ++gx) {
      TilePair p;
      p.scene_id = scene_id;
      p.grid_x = gx;
      p.grid_y = gy;
      p.lr = crop(lr, gx * stride, gy * stride, spec.lr_tile, spec.lr_tile);
      p.hr = crop(hr, gx * stride * kScaleFactor, gy * stride * kScaleFactor, spec.hr_tile,
                  spec.hr_tile);
      out.push_back(std::move(p));
    }
  }
  return out;
}

SplitAssignment split_indices(std::size_t n, double ratio, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  // The small slack keeps products such as 0.8 * 10 from rounding up past 8.
  const auto n_train = std::min<std::size_t>(
      n, static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n) - 1e-9)));
  SplitAssignment a;
  a.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  a.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return a;
}

std::pair<std::vector<TilePair>, std::vector<TilePair>> split_dataset(std::vector<TilePair> pairs,
                                                                      const TileSpec& spec) {
  if (pairs.empty()) throw ValidationError("cannot split an empty pair list");
  const SplitAssignment a = split_indices(pairs.size(), spec.split_ratio, spec.seed);
  std::vector<TilePair> train, val;
  train.reserve(a.train.size());
  val.reserve(a.val.size());
  for (auto i : a.train) {
    pairs[i].split = Split::Train;
    train.push_back(std::move(pairs[i]));
  }
  for (auto i : a.val) {
    pairs[i].split = Split::Val;
    val.push_back(std::move(pairs[i]));
  }
  return {std::move(train), std::move(val)};
}

std::vector<SceneEntry> read_scene_list(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scene list '" + path.string() + "'");
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.contains("scenes") || !j["scenes"].is_array())
    throw ValidationError("scene list '" + path.string() + "' must contain a \"scenes\" array");
  const fs::path base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    fs::path q(p);
    return q.is_absolute() ? q : base / q;
  };
  std::vector<SceneEntry> out;
  for (const auto& s : j["scenes"]) {
    SceneEntry e;
    e.id = s.at("id").get<std::string>();
    e.ms = resolve(s.at("ms").get<std::string>());
    if (s.contains("pan")) e.pan = resolve(s["pan"].get<std::string>());
    if (s.contains("hr")) e.hr = resolve(s["hr"].get<std::string>());
    if (!e.pan && !e.hr)
      throw ValidationError("scene '" + e.id + "' needs either \"pan\" or \"hr\"");
    out.push_back(std::move(e));
  }
  return out;
}

void write_scene_list(const fs::path& path, const std::vector<SceneEntry>& scenes) {
  const fs::path base = path.parent_path();
  auto rel = [&](const fs::path& p) { return fs::relative(p, base.empty() ? "." : base).generic_string(); };
  json j;
  j["scenes"] = json::array();
  for (const auto& s : scenes) {
    json e;
    e["id"] = s.id;
    e["ms"] = rel(s.ms);
    if (s.pan) e["pan"] = rel(*s.pan);
    if (s.hr) e["hr"] = rel(*s.hr);
    j["scenes"].push_back(e);
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write scene list '" + path.string() + "'");
  out << j.dump(2) << "\n";
}

namespace {

json spec_json(const TileSpec& s) {
  return {{"hr_tile", s.hr_tile},
          {"lr_tile", s.lr_tile},
          {"stride_fraction", s.stride_fraction},
          {"split_ratio", s.split_ratio},
          {"seed", s.seed}};
}

TileSpec spec_from_json(const json& j) {
  TileSpec s;
  s.hr_tile = j.at("hr_tile").get<int>();
  s.lr_tile = j.at("lr_tile").get<int>();
  s.stride_fraction = j.at("stride_fraction").get<double>();
  s.split_ratio = j.at("split_ratio").get<double>();
  s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

std::string tile_stem(const std::string& scene, int gx, int gy) {
  std::ostringstream os;
  os << scene << "_x" << gx << "_y" << gy;
  return os.str();
}

}  // namespace

DatasetManifest build_dataset(const std::vector<SceneEntry>& scenes, const TileSpec& spec,
                              const fs::path& out_dir, const SfimParams& sfim_params) {
  spec.validate();
  if (scenes.empty()) throw ValidationError("scene list is empty");
  for (const auto& s : scenes) {
    if (!fs::exists(s.ms)) throw IoError("missing scene file '" + s.ms.string() + "'");
    if (s.hr && !fs::exists(*s.hr)) throw IoError("missing scene file '" + s.hr->string() + "'");
    if (!s.hr && s.pan && !fs::exists(*s.pan))
      throw IoError("missing scene file '" + s.pan->string() + "'");
  }
  fs::create_directories(out_dir / "tiles");

  // Tiles per scene, in scene order.
  std::vector<std::vector<TilePair>> per_scene(scenes.size());
  parallel_for(scenes.size(), [&](std::size_t i) {
    const SceneEntry& s = scenes[i];
    const RasterImage lr = read_raster(s.ms);
    RasterImage hr;
    if (s.hr) {
      hr = read_raster(*s.hr);
    } else {
      // Quantize through the file format so tiles match what a reader would see.
      hr = sfim(lr, read_raster(*s.pan), sfim_params).quantized();
    }
    per_scene[i] = tile_scene(lr, hr, spec, s.id);
  });

  std::vector<TilePair> pooled;
  for (auto& v : per_scene)
    for (auto& p : v) pooled.push_back(std::move(p));
  if (pooled.empty()) throw ValidationError("no tiles produced");

  const SplitAssignment a = split_indices(pooled.size(), spec.split_ratio, spec.seed);
  for (auto i : a.val) pooled[i].split = Split::Val;

  DatasetManifest m;
  m.root = out_dir;
  m.spec = spec;
  for (const auto& s : scenes) m.scene_ids.push_back(s.id);
  m.records.resize(pooled.size());
  parallel_for(pooled.size(), [&](std::size_t i) {
    const TilePair& p = pooled[i];
    const std::string stem = tile_stem(p.scene_id, p.grid_x, p.grid_y);
    TileRecord r{p.scene_id, p.grid_x, p.grid_y, "tiles/" + stem + "_lr.tif",
                 "tiles/" + stem + "_hr.tif", p.split};
    write_raster(p.lr, out_dir / r.lr_path);
    write_raster(p.hr, out_dir / r.hr_path);
    m.records[i] = std::move(r);
  });
  m.train_count = a.train.size();
  m.val_count = a.val.size();

  {
    std::ofstream out(out_dir / kManifestFile);
    if (!out) throw IoError("cannot write manifest in '" + out_dir.string() + "'");
    for (const auto& r : m.records) {
      json j = {{"scene_id", r.scene_id}, {"grid_x", r.grid_x}, {"grid_y", r.grid_y},
                {"lr", r.lr_path},        {"hr", r.hr_path},    {"split", std::string(to_string(r.split))}};
      out << j.dump() << "\n";
    }
  }
  {
    json j = {{"tile_spec", spec_json(spec)},
              {"seed", spec.seed},
              {"scene_ids", m.scene_ids},
              {"counts", {{"train", m.train_count}, {"val", m.val_count}, {"total", m.records.size()}}}};
    std::ofstream out(out_dir / kDatasetFile);
    if (!out) throw IoError("cannot write dataset header in '" + out_dir.string() + "'");
    out << j.dump(2) << "\n";
  }
  return m;
}

DatasetManifest load_dataset(const fs::path& root) {
  DatasetManifest m;
  m.root = root;
  std::ifstream head(root / kDatasetFile);
  if (!head) throw IoError("missing " + std::string(kDatasetFile) + " in '" + root.string() + "'");
  json h = json::parse(head, nullptr, false);
  if (h.is_discarded()) throw ValidationError("malformed " + std::string(kDatasetFile));
  m.spec = spec_from_json(h.at("tile_spec"));
  m.scene_ids = h.at("scene_ids").get<std::vector<std::string>>();

  std::ifstream lines(root / kManifestFile);
  if (!lines) throw IoError("missing " + std::string(kManifestFile) + " in '" + root.string() + "'");
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw ValidationError("malformed manifest line: " + line);
    TileRecord r{j.at("scene_id").get<std::string>(), j.at("grid_x").get<int>(),
                 j.at("grid_y").get<int>(),           j.at("lr").get<std::string>(),
                 j.at("hr").get<std::string>(),       parse_split(j.at("split").get<std::string>())};
    if (!fs::exists(root / r.lr_path) || !fs::exists(root / r.hr_path))
      throw ValidationError("manifest references missing tile '" + r.lr_path + "'");
    (r.split == Split::Train ? m.train_count : m.val_count)++;
    m.records.push_back(std::move(r));
  }
  const auto& c = h.at("counts");
  if (c.at("train").get<std::size_t>() != m.train_count || c.at("val").get<std::size_t>() != m.val_count ||
      c.at("total").get<std::size_t>() != m.records.size())
    throw ValidationError("manifest and dataset header disagree on tile counts");
  return m;
}

void for_each_pair(const DatasetManifest& m, std::optional<Split> only,
                   const std::function<void(const TilePair&)>& fn) {
  for (const auto& r : m.records) {
    if (only && r.split != *only) continue;
    TilePair p;
    p.scene_id = r.scene_id;
    p.grid_x = r.grid_x;
    p.grid_y = r.grid_y;
    p.split = r.split;
    p.lr = read_raster(m.root / r.lr_path);
    p.hr = read_raster(m.root / r.hr_path);
    fn(p);
  }
}

std::vector<TilePair> load_pairs(const DatasetManifest& m, std::optional<Split> only) {
  std::vector<TilePair> out;
  for_each_pair(m, only, [&](const TilePair& p) { out.push_back(p); });
  return out;
}

}  // namespace pansr
