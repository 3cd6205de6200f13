#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "pansr/nn/layers.hpp"

namespace pansr::nn {

/// How a network receives its low-resolution input.
enum class InputConvention {
  /// Bicubic x4 upsampling happens outside the layer graph; the network maps
  /// (c, 4h, 4w) -> (4, 4h, 4w).
  PreUpsampled,
  /// The network maps (c, h, w) -> (4, 4h, 4w) itself.
  NativeLr,
};

std::string_view to_string(InputConvention c);

struct ArchitectureSpec {
  std::string name;
  InputConvention input = InputConvention::PreUpsampled;
  int in_channels = 4;
  std::vector<LayerSpec> layers;

  bool operator==(const ArchitectureSpec&) const = default;

  /// (layer index, source activation index) for every add_skip.
  std::vector<std::pair<int, int>> skip_links() const;

  /// Shapes of all activations for network input `in` (index 0 is `in`).
  /// Throws ValidationError on any incompatibility, including skip links that
  /// point forward or connect tensors of different shapes.
  std::vector<Shape> activation_shapes(const Shape& in) const;

  /// Structural checks on an 8x8 LR probe; with `sr_contract` also requires
  /// the x4, 4-channel output every super-resolution network must produce.
  void validate(bool sr_contract = true) const;

  /// Network input shape for a batch of LR tiles of size h x w.
  Shape network_input(int n, int h, int w) const;
};

inline constexpr int kSrScale = 4;

/// srcnn, aesr, rednet30 or srresnet.
ArchitectureSpec build_architecture(std::string_view name);
const std::vector<std::string>& architecture_names();

}  // namespace pansr::nn
