#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pansr/nn/architecture.hpp"

namespace pansr::nn {

struct GradCheckOptions {
  /// Network input shape; zero fields mean "pick a small default".
  Shape input{};
  double h = 1e-5;
  /// Entries probed per tensor; tensors at most this large are checked fully.
  int max_entries = 16;
  /// Probes whose gradient magnitude is below (finite-difference resolution /
  /// resolvable_rel) are skipped: rounding alone could exceed that relative error.
  double resolvable_rel = 1e-4;
};

struct GradCheckEntry {
  std::string tensor;  // "input" or "layer<i>.<kind>.<weight|bias|slope>"
  std::size_t size = 0;
  std::size_t checked = 0;
  /// Probes discarded because the +-h step crossed a ReLU/PReLU kink or
  /// changed a max-pool winner; replaced by other entries where possible.
  std::size_t skipped = 0;
  /// Probes with a gradient too small for the difference to resolve.
  std::size_t unresolved = 0;
  double max_abs_error = 0.0;
  double max_rel_error = 0.0;
};

struct GradCheckReport {
  std::string subject;
  std::vector<GradCheckEntry> entries;
  double max_rel_error = 0.0;
  /// Estimated absolute rounding error of one central difference.
  double resolution = 0.0;
  /// Every tensor must have at least one checked probe.
  bool passed(double tol = 1e-4) const {
    for (const auto& e : entries)
      if (e.checked == 0) return false;
    return max_rel_error < tol;
  }
};

/// Compares analytic gradients of L = sum(r * f(x)) for a fixed random r with
/// central finite differences, for the input and every parameter tensor.
/// Relative error is |a - n| / max(|a|, |n|, 1e-8). Probes that straddle a
/// kink or whose gradient is below the difference's resolution are replaced.
GradCheckReport grad_check(const ArchitectureSpec& spec, std::uint64_t seed, const GradCheckOptions& opt = {});

/// Single layer wrapped as a one-layer graph (add_skip adds the input to itself).
/// Default input: (1, in_channels, 5, 5) with in_channels = 8.
GradCheckReport grad_check_layer(const LayerSpec& layer, std::uint64_t seed, const GradCheckOptions& opt = {});

}  // namespace pansr::nn
