#include "pansr/nn/architecture.hpp"

#include "pansr/error.hpp"

namespace pansr::nn {

std::string_view to_string(InputConvention c) {
  return c == InputConvention::PreUpsampled ? "pre_upsampled" : "native_lr";
}

std::vector<std::pair<int, int>> ArchitectureSpec::skip_links() const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < static_cast<int>(layers.size()); ++i)
    if (layers[i].kind == LayerKind::AddSkip) out.emplace_back(i, layers[i].skip_from);
  return out;
}

std::vector<Shape> ArchitectureSpec::activation_shapes(const Shape& in) const {
  if (in.c != in_channels)
    throw ValidationError(name + ": expected " + std::to_string(in_channels) + " input channels, got " +
                          std::to_string(in.c));
  std::vector<Shape> shapes{in};
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& l = layers[i];
    if (l.kind == LayerKind::AddSkip) {
      if (l.skip_from < 0 || l.skip_from > static_cast<int>(i))
        throw ValidationError(name + ": layer " + std::to_string(i) + " skips from invalid activation " +
                              std::to_string(l.skip_from));
      if (!(shapes[l.skip_from] == shapes.back()))
        throw ValidationError(name + ": layer " + std::to_string(i) + " adds " + shapes[l.skip_from].str() +
                              " to " + shapes.back().str());
    }
    try {
      shapes.push_back(layer_output_shape(l, shapes.back()));
    } catch (const ValidationError& e) {
      throw ValidationError(name + ": layer " + std::to_string(i) + ": " + e.what());
    }
  }
  return shapes;
}

Shape ArchitectureSpec::network_input(int n, int h, int w) const {
  if (input == InputConvention::PreUpsampled) return {n, in_channels, h * kSrScale, w * kSrScale};
  return {n, in_channels, h, w};
}

void ArchitectureSpec::validate(bool sr_contract) const {
  if (name.empty()) throw ValidationError("architecture needs a name");
  if (layers.empty()) throw ValidationError(name + ": no layers");
  const Shape probe = network_input(1, 8, 8);
  const Shape out = activation_shapes(probe).back();
  if (sr_contract && !(out == Shape{1, 4, 8 * kSrScale, 8 * kSrScale}))
    throw ValidationError(name + ": maps an 8x8 LR input to " + out.str() + ", expected (1,4,32,32)");
}

namespace {

ArchitectureSpec srcnn() {
  ArchitectureSpec a{"srcnn", InputConvention::PreUpsampled, 4, {}};
  a.layers = {LayerSpec::conv(9, 64), LayerSpec::relu(), LayerSpec::conv(1, 32), LayerSpec::relu(),
              LayerSpec::conv(5, 4)};
  return a;
}

// Encoder-decoder with max-pooling, nearest upsampling, additive skips from
// the two encoder stages, and a global residual to the (upsampled) input.
ArchitectureSpec aesr() {
  ArchitectureSpec a{"aesr", InputConvention::PreUpsampled, 4, {}};
  auto& L = a.layers;
  L.push_back(LayerSpec::conv(3, 64));
  L.push_back(LayerSpec::relu());
  const int e1 = static_cast<int>(L.size());
  L.push_back(LayerSpec::maxpool());
  L.push_back(LayerSpec::conv(3, 128));
  L.push_back(LayerSpec::relu());
  const int e2 = static_cast<int>(L.size());
  L.push_back(LayerSpec::maxpool());
  L.push_back(LayerSpec::conv(3, 256));
  L.push_back(LayerSpec::relu());
  L.push_back(LayerSpec::upsample());
  L.push_back(LayerSpec::conv(3, 128));
  L.push_back(LayerSpec::relu());
  L.push_back(LayerSpec::add_skip(e2));
  L.push_back(LayerSpec::upsample());
  L.push_back(LayerSpec::conv(3, 64));
  L.push_back(LayerSpec::relu());
  L.push_back(LayerSpec::add_skip(e1));
  L.push_back(LayerSpec::conv(3, 4));
  L.push_back(LayerSpec::add_skip(0));
  return a;
}

// 15 conv + 15 transposed conv, 64 maps. Every second encoder activation is
// added to the mirrored decoder activation; the input is added at the end.
ArchitectureSpec rednet30() {
  constexpr int kDepth = 15;
  ArchitectureSpec a{"rednet30", InputConvention::PreUpsampled, 4, {}};
  auto& L = a.layers;
  std::vector<int> feats;
  for (int i = 0; i < kDepth; ++i) {
    L.push_back(LayerSpec::conv(3, 64));
    L.push_back(LayerSpec::relu());
    if ((i + 1) % 2 == 0 && static_cast<int>(feats.size()) < (kDepth + 1) / 2 - 1)
      feats.push_back(static_cast<int>(L.size()));
  }
  std::size_t used = 0;
  for (int i = 0; i < kDepth; ++i) {
    const bool last = i == kDepth - 1;
    L.push_back(LayerSpec::tconv(3, last ? 4 : 64));
    if (!last) L.push_back(LayerSpec::relu());
    if ((i + 1 + kDepth) % 2 == 0 && used < feats.size()) {
      L.push_back(LayerSpec::add_skip(feats[feats.size() - 1 - used]));
      ++used;
      L.push_back(LayerSpec::relu());
    }
  }
  L.push_back(LayerSpec::add_skip(0));
  L.push_back(LayerSpec::relu());
  return a;
}

// Residual network without batch normalization: 16 blocks, a long skip over
// the body, and two x2 sub-pixel upsampling stages.
ArchitectureSpec srresnet() {
  constexpr int kBlocks = 16;
  ArchitectureSpec a{"srresnet", InputConvention::NativeLr, 4, {}};
  auto& L = a.layers;
  L.push_back(LayerSpec::conv(9, 64));
  L.push_back(LayerSpec::prelu());
  const int head = static_cast<int>(L.size());
  for (int b = 0; b < kBlocks; ++b) {
    const int block_in = static_cast<int>(L.size());
    L.push_back(LayerSpec::conv(3, 64));
    L.push_back(LayerSpec::prelu());
    L.push_back(LayerSpec::conv(3, 64));
    L.push_back(LayerSpec::add_skip(block_in));
  }
  L.push_back(LayerSpec::conv(3, 64));
  L.push_back(LayerSpec::add_skip(head));
  for (int s = 0; s < 2; ++s) {
    L.push_back(LayerSpec::conv(3, 256));
    L.push_back(LayerSpec::pixel_shuffle(2));
    L.push_back(LayerSpec::prelu());
  }
  L.push_back(LayerSpec::conv(9, 4));
  return a;
}

}  // namespace

const std::vector<std::string>& architecture_names() {
  static const std::vector<std::string> names{"srcnn", "aesr", "rednet30", "srresnet"};
  return names;
}

ArchitectureSpec build_architecture(std::string_view name) {
  if (name == "srcnn") return srcnn();
  if (name == "aesr") return aesr();
  if (name == "rednet30") return rednet30();
  if (name == "srresnet") return srresnet();
  throw ValidationError("unknown architecture '" + std::string(name) +
                        "' (expected srcnn, aesr, rednet30 or srresnet)");
}

}  // namespace pansr::nn
