#include "pansr/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "pansr/error.hpp"

namespace pansr::nn {

namespace {

constexpr char kMagic[8] = {'P', 'A', 'N', 'S', 'R', 'C', 'K', 'P'};

class Writer {
 public:
  void u8(std::uint8_t v) { buf.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    buf.insert(buf.end(), s.begin(), s.end());
  }
  std::vector<std::uint8_t> buf;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& b) : buf_(b) {}
  void need(std::size_t n) const {
    if (pos_ + n > buf_.size()) throw ValidationError("checkpoint truncated at byte " + std::to_string(pos_));
  }
  std::uint8_t u8() {
    need(1);
    return buf_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf_[pos_++]) << (8 * i);
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(buf_.begin() + pos_, buf_.begin() + pos_ + n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == buf_.size(); }

 private:
  const std::vector<std::uint8_t>& buf_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Model& model, std::uint64_t step) {
  Writer w;
  w.buf.insert(w.buf.end(), std::begin(kMagic), std::end(kMagic));
  w.u32(kCheckpointVersion);
  const ArchitectureSpec& a = model.spec();
  w.str(a.name);
  w.u8(a.input == InputConvention::PreUpsampled ? 0 : 1);
  w.i32(a.in_channels);
  w.u32(static_cast<std::uint32_t>(a.layers.size()));
  for (const LayerSpec& l : a.layers) {
    w.u8(static_cast<std::uint8_t>(l.kind));
    w.i32(l.kernel);
    w.i32(l.out_channels);
    w.i32(l.stride);
    w.i32(l.factor);
    w.i32(l.skip_from);
  }
  w.str(model.init().scheme);
  w.u64(model.init().seed);
  w.u64(step);
  for (const auto& layer : model.params()) {
    w.u32(static_cast<std::uint32_t>(layer.size()));
    for (const Tensor& t : layer) {
      const Shape s = t.shape();
      w.i32(s.n);
      w.i32(s.c);
      w.i32(s.h);
      w.i32(s.w);
      for (double v : t.values()) w.f32(static_cast<float>(v));
    }
  }
  return std::move(w.buf);
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  r.need(sizeof kMagic);
  for (char c : kMagic)
    if (r.u8() != static_cast<std::uint8_t>(c)) throw ValidationError("not a pansr checkpoint (bad magic)");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion)
    throw ValidationError("unsupported checkpoint version " + std::to_string(version));
  ArchitectureSpec a;
  a.name = r.str();
  const std::uint8_t conv = r.u8();
  if (conv > 1) throw ValidationError("checkpoint: bad input convention");
  a.input = conv == 0 ? InputConvention::PreUpsampled : InputConvention::NativeLr;
  a.in_channels = r.i32();
  const std::uint32_t n_layers = r.u32();
  if (n_layers > 100000) throw ValidationError("checkpoint: implausible layer count");
  for (std::uint32_t i = 0; i < n_layers; ++i) {
    LayerSpec l;
    const std::uint8_t kind = r.u8();
    if (kind > static_cast<std::uint8_t>(LayerKind::AddSkip)) throw ValidationError("checkpoint: bad layer kind");
    l.kind = static_cast<LayerKind>(kind);
    l.kernel = r.i32();
    l.out_channels = r.i32();
    l.stride = r.i32();
    l.factor = r.i32();
    l.skip_from = r.i32();
    a.layers.push_back(l);
  }
  InitRecord init;
  init.scheme = r.str();
  init.seed = r.u64();
  const std::uint64_t step = r.u64();
  ParamSet params(n_layers);
  for (std::uint32_t i = 0; i < n_layers; ++i) {
    const std::uint32_t count = r.u32();
    if (count > 16) throw ValidationError("checkpoint: implausible parameter count");
    for (std::uint32_t j = 0; j < count; ++j) {
      Shape s{r.i32(), r.i32(), r.i32(), r.i32()};
      if (s.n < 0 || s.c < 0 || s.h < 0 || s.w < 0) throw ValidationError("checkpoint: negative tensor shape");
      r.need(s.numel() * 4);
      Tensor t(s);
      for (auto& v : t.values()) v = static_cast<double>(r.f32());
      params[i].push_back(std::move(t));
    }
  }
  if (!r.done()) throw ValidationError("checkpoint: trailing bytes");
  return {Model(std::move(a), std::move(params), std::move(init)), step};
}

void save_checkpoint(const std::filesystem::path& path, const Model& model, std::uint64_t step) {
  const auto bytes = encode_checkpoint(model, step);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  try {
    return decode_checkpoint(bytes);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::filesystem::path history_path(const std::filesystem::path& checkpoint) {
  return checkpoint.string() + ".history.json";
}

}  // namespace pansr::nn
