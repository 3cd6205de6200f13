#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pansr/nn/architecture.hpp"
#include "pansr/nn/tensor.hpp"

namespace pansr::nn {

/// Fan-in-scaled uniform weights; convs immediately followed by add_skip are
/// additionally scaled by kResidualInitGain.
inline constexpr const char* kInitScheme = "he_uniform_res0.1";
inline constexpr double kResidualInitGain = 0.1;

/// How the parameters were first drawn.
struct InitRecord {
  std::string scheme = kInitScheme;
  std::uint64_t seed = 0;
  bool operator==(const InitRecord&) const = default;
};

/// Per-layer parameter tensors in layer order (empty for parameter-free layers).
using ParamSet = std::vector<std::vector<Tensor>>;

/// Zero tensors shaped like `like`.
ParamSet zeros_like(const ParamSet& like);

/// Rounds every parameter to the nearest float32 value. Parameters are kept
/// float32-representable so that checkpoints reproduce them exactly.
void round_to_float(ParamSet& p);

/// Recorded activations of one forward pass; acts[0] is the input.
struct Tape {
  std::vector<Tensor> acts;
};

struct Gradients {
  ParamSet params;
  Tensor input;
};

class Model {
 public:
  Model() = default;
  /// Weights uniform in +-sqrt(6 / fan_in) (times kResidualInitGain on residual
  /// branches), biases zero, PReLU slopes 0.25.
  Model(ArchitectureSpec spec, std::uint64_t seed);
  /// Adopts existing parameters (e.g. from a checkpoint); shapes are checked.
  Model(ArchitectureSpec spec, ParamSet params, InitRecord init);

  const ArchitectureSpec& spec() const { return spec_; }
  const ParamSet& params() const { return params_; }
  ParamSet& params() { return params_; }
  const InitRecord& init() const { return init_; }
  std::size_t parameter_count() const;

  /// Runs the layer graph on a network input (see ArchitectureSpec::network_input).
  /// Throws NumericError naming the first layer whose output is not finite.
  Tensor forward(const Tensor& x) const;
  Tensor forward(const Tensor& x, Tape& tape) const;
  /// Re-runs layers first.. on a tape whose acts[0..first] are still valid.
  Tensor forward_from(std::size_t first, Tape& tape) const;

  /// Gradients of sum(grad_out * output) for the pass recorded in tape.
  Gradients backward(const Tape& tape, const Tensor& grad_out) const;

  /// Maps normalized LR tiles (n, 4, h, w) to (n, 4, 4h, 4w), applying the
  /// bicubic pre-upsampling first when the architecture expects it.
  Tensor forward_lr(const Tensor& lr) const;
  /// The tensor fed to the layer graph for LR input `lr`.
  Tensor prepare_input(const Tensor& lr) const;

 private:
  void check_params() const;

  ArchitectureSpec spec_;
  ParamSet params_;
  InitRecord init_;
};

/// Bicubic x4 upsampling of every channel of every sample (no clamping).
Tensor upsample_bicubic(const Tensor& lr, int factor = kSrScale);

}  // namespace pansr::nn
