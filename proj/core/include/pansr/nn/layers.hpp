#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "pansr/nn/tensor.hpp"

namespace pansr::nn {

enum class LayerKind { Conv, TransposedConv, MaxPool, UpsampleNearest, PixelShuffle, PReLU, ReLU, AddSkip };

std::string_view to_string(LayerKind k);
LayerKind parse_layer_kind(std::string_view s);

/// One step of a feed-forward graph. Activations are numbered so that 0 is
/// the network input and i + 1 is the output of layer i; `skip_from` refers to
/// that numbering.
struct LayerSpec {
  LayerKind kind = LayerKind::ReLU;
  int kernel = 0;        // conv / transposed_conv
  int out_channels = 0;  // conv / transposed_conv
  int stride = 1;        // conv / transposed_conv
  int factor = 2;        // maxpool window, upsample and pixel-shuffle ratio
  int skip_from = -1;    // add_skip

  bool operator==(const LayerSpec&) const = default;

  static LayerSpec conv(int k, int n, int s = 1) { return {LayerKind::Conv, k, n, s, 2, -1}; }
  static LayerSpec tconv(int k, int n, int s = 1) { return {LayerKind::TransposedConv, k, n, s, 2, -1}; }
  static LayerSpec maxpool() { return {LayerKind::MaxPool, 0, 0, 1, 2, -1}; }
  static LayerSpec upsample() { return {LayerKind::UpsampleNearest, 0, 0, 1, 2, -1}; }
  static LayerSpec pixel_shuffle(int r = 2) { return {LayerKind::PixelShuffle, 0, 0, 1, r, -1}; }
  static LayerSpec prelu() { return {LayerKind::PReLU, 0, 0, 1, 2, -1}; }
  static LayerSpec relu() { return {LayerKind::ReLU, 0, 0, 1, 2, -1}; }
  static LayerSpec add_skip(int from) { return {LayerKind::AddSkip, 0, 0, 1, 2, from}; }
};

/// Output shape for an input of shape `in`; throws ValidationError on
/// incompatible shapes or malformed specs.
Shape layer_output_shape(const LayerSpec& l, const Shape& in);

/// Parameter shapes, in storage order. conv: weight (out, in, k, k) then bias
/// (1, out, 1, 1); transposed_conv: weight (in, out, k, k) then bias;
/// prelu: per-channel slopes (1, c, 1, 1).
std::vector<Shape> layer_param_shapes(const LayerSpec& l, const Shape& in);

/// Fan-in used to scale the initial weights of a learnable layer.
int layer_fan_in(const LayerSpec& l, const Shape& in);

/// `skip` is required for add_skip and ignored otherwise.
Tensor layer_forward(const LayerSpec& l, const Tensor& x, std::span<const Tensor> params,
                     const Tensor* skip = nullptr);

/// Backpropagates gy (gradient w.r.t. the output y) through the layer.
/// Writes the input gradient to gx (overwritten) and accumulates parameter
/// gradients into gparams. For add_skip the gradient owed to the skip source
/// equals gy and is left to the caller.
void layer_backward(const LayerSpec& l, const Tensor& x, std::span<const Tensor> params, const Tensor& gy,
                    Tensor& gx, std::span<Tensor> gparams);

}  // namespace pansr::nn
