#include "pansr/raster_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

#include <json.hpp>

#include "pansr/error.hpp"

namespace pansr {
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr std::uint16_t kImageWidth = 256;
constexpr std::uint16_t kImageLength = 257;
constexpr std::uint16_t kBitsPerSample = 258;
constexpr std::uint16_t kCompression = 259;
constexpr std::uint16_t kPhotometric = 262;
constexpr std::uint16_t kImageDescription = 270;
constexpr std::uint16_t kStripOffsets = 273;
constexpr std::uint16_t kSamplesPerPixel = 277;
constexpr std::uint16_t kRowsPerStrip = 278;
constexpr std::uint16_t kStripByteCounts = 279;
constexpr std::uint16_t kPlanarConfig = 284;
constexpr std::uint16_t kExtraSamples = 338;
constexpr std::uint16_t kSampleFormat = 339;
constexpr std::uint16_t kModelPixelScale = 33550;

// Geolocation / GDAL tags that survive a read-write cycle.
constexpr std::array<std::uint16_t, 8> kPassthroughIds = {33550, 33922, 34264, 34735,
                                                          34736, 34737, 42112, 42113};

constexpr std::uint16_t kShort = 3;
constexpr std::uint16_t kLong = 4;
constexpr std::uint16_t kAscii = 2;

std::size_t type_size(std::uint16_t type) {
  switch (type) {
    case 1: case 2: case 6: case 7: return 1;
    case 3: case 8: return 2;
    case 4: case 9: case 11: return 4;
    case 5: case 10: case 12: return 8;
    default: return 0;
  }
}

// Element width for byte swapping (rationals swap as two 4-byte words).
std::size_t swap_unit(std::uint16_t type) {
  return (type == 5 || type == 10) ? 4 : type_size(type);
}

class Reader {
 public:
  Reader(std::vector<std::uint8_t> bytes, std::string name)
      : buf_(std::move(bytes)), name_(std::move(name)) {
    if (buf_.size() < 8) fail("file too short for a TIFF header");
    if (buf_[0] == 'I' && buf_[1] == 'I') big_ = false;
    else if (buf_[0] == 'M' && buf_[1] == 'M') big_ = true;
    else fail("not a TIFF file");
    if (u16(2) != 42) fail("unsupported TIFF variant (BigTIFF or bad magic)");
  }

  std::uint16_t u16(std::size_t off) const {
    need(off, 2);
    return big_ ? static_cast<std::uint16_t>(buf_[off] << 8 | buf_[off + 1])
                : static_cast<std::uint16_t>(buf_[off] | buf_[off + 1] << 8);
  }
  std::uint32_t u32(std::size_t off) const {
    need(off, 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      const std::uint32_t b = buf_[off + i];
      v |= big_ ? b << (8 * (3 - i)) : b << (8 * i);
    }
    return v;
  }
  void need(std::size_t off, std::size_t n) const {
    if (off + n > buf_.size() || off + n < off) fail("truncated TIFF data");
  }
  [[noreturn]] void fail(const std::string& why) const {
    throw ValidationError(name_ + ": " + why);
  }
  bool big_endian() const { return big_; }
  const std::vector<std::uint8_t>& bytes() const { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
  std::string name_;
  bool big_ = false;
};

struct Entry {
  std::uint16_t type = 0;
  std::uint32_t count = 0;
  std::size_t value_offset = 0;  // where the values live in the file
};

std::vector<std::uint32_t> read_uints(const Reader& r, const Entry& e) {
  std::vector<std::uint32_t> out(e.count);
  for (std::uint32_t i = 0; i < e.count; ++i) {
    if (e.type == kShort) out[i] = r.u16(e.value_offset + 2 * i);
    else if (e.type == kLong) out[i] = r.u32(e.value_offset + 4 * i);
    else r.fail("unexpected field type " + std::to_string(e.type));
  }
  return out;
}

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open raster '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct Embedded {
  std::vector<BandRole> band_order;
  std::optional<double> pixel_size_m;
};

std::optional<Embedded> parse_description(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  Embedded e;
  if (j.contains("band_order"))
    for (const auto& r : j.at("band_order")) e.band_order.push_back(parse_band_role(r.get<std::string>()));
  if (j.contains("pixel_size_m") && j.at("pixel_size_m").is_number())
    e.pixel_size_m = j.at("pixel_size_m").get<double>();
  return e;
}

json metadata_json(const std::vector<BandRole>& roles, std::optional<double> pixel_size) {
  json j;
  j["band_order"] = json::array();
  for (auto r : roles) j["band_order"].push_back(std::string(to_string(r)));
  if (pixel_size) j["pixel_size_m"] = *pixel_size;
  return j;
}

class Writer {
 public:
  void u16(std::uint16_t v) {
    buf.push_back(static_cast<std::uint8_t>(v));
    buf.push_back(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void put_u32(std::size_t off, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf[off + i] = static_cast<std::uint8_t>(v >> (8 * i));
  }
  void pad_even() {
    if (buf.size() % 2) buf.push_back(0);
  }
  std::vector<std::uint8_t> buf;
};

struct OutTag {
  std::uint16_t id;
  std::uint16_t type;
  std::uint32_t count;
  std::vector<std::uint8_t> bytes;  // little-endian
};

OutTag short_tag(std::uint16_t id, std::vector<std::uint16_t> vals) {
  OutTag t{id, kShort, static_cast<std::uint32_t>(vals.size()), {}};
  for (auto v : vals) {
    t.bytes.push_back(static_cast<std::uint8_t>(v));
    t.bytes.push_back(static_cast<std::uint8_t>(v >> 8));
  }
  return t;
}

OutTag long_tag(std::uint16_t id, const std::vector<std::uint32_t>& vals) {
  OutTag t{id, kLong, static_cast<std::uint32_t>(vals.size()), {}};
  for (auto v : vals)
    for (int i = 0; i < 4; ++i) t.bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  return t;
}

}  // namespace

fs::path sidecar_path(const fs::path& raster) {
  fs::path p = raster;
  p += ".json";
  return p;
}

std::optional<RasterSidecar> read_sidecar(const fs::path& raster) {
  const fs::path p = sidecar_path(raster);
  if (!fs::exists(p)) return std::nullopt;
  std::ifstream in(p);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw ValidationError("malformed sidecar manifest '" + p.string() + "'");
  RasterSidecar s;
  if (j.contains("band_order"))
    for (const auto& r : j.at("band_order")) s.band_order.push_back(parse_band_role(r.get<std::string>()));
  if (j.contains("pixel_size_m")) s.pixel_size_m = j.at("pixel_size_m").get<double>();
  return s;
}

void write_sidecar(const fs::path& raster, const RasterSidecar& sidecar) {
  const fs::path p = sidecar_path(raster);
  std::ofstream out(p);
  if (!out) throw IoError("cannot write sidecar '" + p.string() + "'");
  out << metadata_json(sidecar.band_order, sidecar.pixel_size_m).dump(2) << "\n";
}

RasterImage read_raster(const fs::path& path) {
  Reader r(read_file(path), path.string());

  const std::uint32_t ifd = r.u32(4);
  const std::uint16_t n_entries = r.u16(ifd);
  std::map<std::uint16_t, Entry> tags;
  for (std::uint16_t i = 0; i < n_entries; ++i) {
    const std::size_t off = ifd + 2 + 12 * static_cast<std::size_t>(i);
    Entry e;
    const std::uint16_t id = r.u16(off);
    e.type = r.u16(off + 2);
    e.count = r.u32(off + 4);
    const std::size_t total = type_size(e.type) * e.count;
    e.value_offset = total <= 4 ? off + 8 : r.u32(off + 8);
    if (type_size(e.type) != 0) r.need(e.value_offset, total);
    tags[id] = e;
  }

  auto scalar = [&](std::uint16_t id, std::optional<std::uint32_t> fallback) -> std::uint32_t {
    auto it = tags.find(id);
    if (it == tags.end()) {
      if (!fallback) r.fail("missing required tag " + std::to_string(id));
      return *fallback;
    }
    return read_uints(r, it->second).at(0);
  };

  const auto width = scalar(kImageWidth, std::nullopt);
  const auto height = scalar(kImageLength, std::nullopt);
  const auto spp = scalar(kSamplesPerPixel, 1u);
  if (scalar(kCompression, 1u) != 1) r.fail("compressed TIFF is not supported");
  if (spp != 1 && spp != 4)
    r.fail("band count " + std::to_string(spp) + " not in {1, 4}");
  if (spp > 1 && scalar(kPlanarConfig, 1u) != 1) r.fail("only contiguous planar configuration is supported");
  if (tags.count(kSampleFormat) && read_uints(r, tags[kSampleFormat]).at(0) != 1)
    r.fail("only unsigned integer samples are supported");
  if (!tags.count(kBitsPerSample)) r.fail("missing BitsPerSample");
  for (auto bits : read_uints(r, tags[kBitsPerSample]))
    if (bits != 16) r.fail("only 16-bit samples are supported");
  if (!tags.count(kStripOffsets) || !tags.count(kStripByteCounts)) r.fail("only striped TIFF is supported");
  if (width == 0 || height == 0 || width > (1u << 20) || height > (1u << 20))
    r.fail("implausible raster dimensions");

  const auto rows_per_strip = std::min(scalar(kRowsPerStrip, height), height);
  const auto offsets = read_uints(r, tags[kStripOffsets]);
  const auto counts = read_uints(r, tags[kStripByteCounts]);
  const std::size_t row_bytes = static_cast<std::size_t>(width) * spp * 2;
  const std::size_t n_strips = (height + rows_per_strip - 1) / rows_per_strip;
  if (offsets.size() != n_strips || counts.size() != n_strips) r.fail("strip table size mismatch");

  std::vector<BandRole> roles;
  std::optional<double> pixel_size;
  if (auto it = tags.find(kImageDescription); it != tags.end() && it->second.type == kAscii) {
    const auto& b = r.bytes();
    std::string text(b.begin() + static_cast<std::ptrdiff_t>(it->second.value_offset),
                     b.begin() + static_cast<std::ptrdiff_t>(it->second.value_offset + it->second.count));
    text = text.substr(0, text.find('\0'));
    if (auto e = parse_description(text)) {
      roles = e->band_order;
      pixel_size = e->pixel_size_m;
    }
  }
  if (auto side = read_sidecar(path)) {
    if (!side->band_order.empty()) roles = side->band_order;
    if (side->pixel_size_m) pixel_size = side->pixel_size_m;
  }

  RasterImage img;
  img.width = static_cast<int>(width);
  img.height = static_cast<int>(height);

  for (std::uint16_t id : kPassthroughIds) {
    auto it = tags.find(id);
    if (it == tags.end()) continue;
    const Entry& e = it->second;
    const std::size_t unit = swap_unit(e.type);
    if (unit == 0) continue;
    PassthroughTag t{id, e.type, e.count, {}};
    const auto& b = r.bytes();
    t.bytes.assign(b.begin() + static_cast<std::ptrdiff_t>(e.value_offset),
                   b.begin() + static_cast<std::ptrdiff_t>(e.value_offset + type_size(e.type) * e.count));
    if (r.big_endian() && unit > 1)
      for (std::size_t k = 0; k + unit <= t.bytes.size(); k += unit)
        std::reverse(t.bytes.begin() + static_cast<std::ptrdiff_t>(k),
                     t.bytes.begin() + static_cast<std::ptrdiff_t>(k + unit));
    img.passthrough.push_back(std::move(t));
  }
  if (!pixel_size && tags.count(kModelPixelScale)) {
    const Entry& e = tags[kModelPixelScale];
    if (e.type == 12 && e.count >= 1) {
      std::uint64_t bits = 0;
      for (int i = 0; i < 8; ++i) {
        const std::uint64_t byte = r.bytes()[e.value_offset + i];
        bits |= r.big_endian() ? byte << (8 * (7 - i)) : byte << (8 * i);
      }
      pixel_size = std::bit_cast<double>(bits);
    }
  }

  if (roles.empty()) {
    roles = spp == 1 ? std::vector<BandRole>{BandRole::PAN} : default_ms_roles();
  }
  if (roles.size() != spp)
    r.fail("band_order lists " + std::to_string(roles.size()) + " roles for " +
           std::to_string(spp) + " bands");
  img.roles = roles;
  img.pixel_size_m = pixel_size;
  img.bands.assign(spp, Plane(img.width, img.height));

  for (std::size_t s = 0; s < n_strips; ++s) {
    const std::size_t row0 = s * rows_per_strip;
    const std::size_t rows = std::min<std::size_t>(rows_per_strip, height - row0);
    if (counts[s] < rows * row_bytes) r.fail("strip " + std::to_string(s) + " is too short");
    r.need(offsets[s], rows * row_bytes);
    for (std::size_t y = 0; y < rows; ++y) {
      std::size_t off = offsets[s] + y * row_bytes;
      for (std::uint32_t x = 0; x < width; ++x) {
        for (std::uint32_t c = 0; c < spp; ++c, off += 2) {
          const std::uint16_t v = r.u16(off);
          if (v > kMaxSample12)
            throw ValidationError(path.string() + ": sample out of 12-bit domain (" +
                                  std::to_string(v) + " at x=" + std::to_string(x) +
                                  ", y=" + std::to_string(row0 + y) + ", band " +
                                  std::to_string(c) + ")");
          img.bands[c](static_cast<int>(x), static_cast<int>(row0 + y)) = v;
        }
      }
    }
  }
  img.validate();
  return img;
}

void write_raster(const RasterImage& img, const fs::path& path) {
  img.validate(false);
  const int spp = img.band_count();
  const std::size_t row_bytes = static_cast<std::size_t>(img.width) * spp * 2;
  const std::uint32_t rows_per_strip =
      static_cast<std::uint32_t>(std::max<std::size_t>(1, std::min<std::size_t>(img.height, 65536 / row_bytes)));
  const std::size_t n_strips = (img.height + rows_per_strip - 1) / rows_per_strip;

  Writer w;
  w.buf = {'I', 'I', 42, 0, 0, 0, 0, 0};

  std::vector<std::uint32_t> offsets, counts;
  for (std::size_t s = 0; s < n_strips; ++s) {
    const std::size_t row0 = s * rows_per_strip;
    const std::size_t rows = std::min<std::size_t>(rows_per_strip, img.height - row0);
    offsets.push_back(static_cast<std::uint32_t>(w.buf.size()));
    counts.push_back(static_cast<std::uint32_t>(rows * row_bytes));
    for (std::size_t y = row0; y < row0 + rows; ++y)
      for (int x = 0; x < img.width; ++x)
        for (int c = 0; c < spp; ++c) {
          const double v = std::clamp(std::round(img.bands[c](x, static_cast<int>(y))),
                                      img.domain.lo, img.domain.hi);
          w.u16(static_cast<std::uint16_t>(std::clamp(v, 0.0, 65535.0)));
        }
  }

  std::vector<OutTag> tags;
  tags.push_back(long_tag(kImageWidth, {static_cast<std::uint32_t>(img.width)}));
  tags.push_back(long_tag(kImageLength, {static_cast<std::uint32_t>(img.height)}));
  tags.push_back(short_tag(kBitsPerSample, std::vector<std::uint16_t>(spp, 16)));
  tags.push_back(short_tag(kCompression, {1}));
  tags.push_back(short_tag(kPhotometric, {1}));
  {
    std::string desc = metadata_json(img.roles, img.pixel_size_m).dump();
    OutTag t{kImageDescription, kAscii, static_cast<std::uint32_t>(desc.size() + 1), {}};
    t.bytes.assign(desc.begin(), desc.end());
    t.bytes.push_back(0);
    tags.push_back(std::move(t));
  }
  tags.push_back(long_tag(kStripOffsets, offsets));
  tags.push_back(short_tag(kSamplesPerPixel, {static_cast<std::uint16_t>(spp)}));
  tags.push_back(long_tag(kRowsPerStrip, {rows_per_strip}));
  tags.push_back(long_tag(kStripByteCounts, counts));
  tags.push_back(short_tag(kPlanarConfig, {1}));
  if (spp > 1) tags.push_back(short_tag(kExtraSamples, std::vector<std::uint16_t>(spp - 1, 0)));
  tags.push_back(short_tag(kSampleFormat, std::vector<std::uint16_t>(spp, 1)));
  for (const auto& p : img.passthrough) tags.push_back(OutTag{p.id, p.type, p.count, p.bytes});
  std::stable_sort(tags.begin(), tags.end(), [](const OutTag& a, const OutTag& b) { return a.id < b.id; });

  // Out-of-line values first, then the IFD.
  std::vector<std::uint32_t> value_offsets(tags.size(), 0);
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (tags[i].bytes.size() > 4) {
      w.pad_even();
      value_offsets[i] = static_cast<std::uint32_t>(w.buf.size());
      w.buf.insert(w.buf.end(), tags[i].bytes.begin(), tags[i].bytes.end());
    }
  }
  w.pad_even();
  const auto ifd = static_cast<std::uint32_t>(w.buf.size());
  w.put_u32(4, ifd);
  w.u16(static_cast<std::uint16_t>(tags.size()));
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const OutTag& t = tags[i];
    w.u16(t.id);
    w.u16(t.type);
    w.u32(t.count);
    if (t.bytes.size() > 4) {
      w.u32(value_offsets[i]);
    } else {
      std::array<std::uint8_t, 4> inl{};
      std::copy(t.bytes.begin(), t.bytes.end(), inl.begin());
      w.buf.insert(w.buf.end(), inl.begin(), inl.end());
    }
  }
  w.u32(0);

  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write raster '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(w.buf.data()), static_cast<std::streamsize>(w.buf.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace pansr
