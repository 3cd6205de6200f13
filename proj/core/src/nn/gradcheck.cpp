#include "pansr/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pansr/nn/model.hpp"
#include "pansr/rng.hpp"

namespace pansr::nn {

namespace {

// sum(r * output) after re-running layers first.. on `tape`.
double objective(const Model& m, std::size_t first, const Tensor& r, Tape& tape) {
  // Extended precision keeps the reduction's rounding well below what a
  // central difference with h = 1e-5 can resolve.
  const Tensor y = m.forward_from(first, tape);
  long double s = 0.0L;
  for (std::size_t i = 0; i < y.size(); ++i) s += static_cast<long double>(r[i]) * y[i];
  return static_cast<double>(s);
}

// Winner index of every 2x2 max-pool window, in output order.
std::vector<int> pool_winners(const Tensor& x, int f) {
  const Shape s = x.shape();
  std::vector<int> out;
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c)
      for (int oy = 0; oy < s.h / f; ++oy)
        for (int ox = 0; ox < s.w / f; ++ox) {
          int best = 0;
          for (int k = 1; k < f * f; ++k)
            if (x.at(n, c, oy * f + k / f, ox * f + k % f) > x.at(n, c, oy * f + best / f, ox * f + best % f)) best = k;
          out.push_back(best);
        }
  return out;
}

// True when the two passes took different branches at some non-smooth point
// (a ReLU/PReLU input changing sign, or a max-pool winner changing). The
// central difference straddles a kink there and says nothing about the
// derivative.
bool crossed_kink(const ArchitectureSpec& spec, const Tape& a, const Tape& b) {
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    const Tensor& xa = a.acts[l];
    const Tensor& xb = b.acts[l];
    switch (spec.layers[l].kind) {
      case LayerKind::ReLU:
      case LayerKind::PReLU:
        for (std::size_t i = 0; i < xa.size(); ++i)
          if ((xa[i] > 0.0) != (xb[i] > 0.0)) return true;
        break;
      case LayerKind::MaxPool:
        if (pool_winners(xa, spec.layers[l].factor) != pool_winners(xb, spec.layers[l].factor)) return true;
        break;
      default: break;
    }
  }
  return false;
}

std::vector<std::size_t> probe_indices(std::size_t size, int max_entries, Rng& rng) {
  // Small tensors are checked fully; larger ones get a shuffled prefix so
  // that probes discarded at kinks can be replaced by fresh entries.
  std::vector<std::size_t> idx(size);
  for (std::size_t i = 0; i < size; ++i) idx[i] = i;
  if (size > static_cast<std::size_t>(max_entries)) {
    for (std::size_t i = 0; i < std::min<std::size_t>(size - 1, 8 * static_cast<std::size_t>(max_entries)); ++i)
      std::swap(idx[i], idx[i + static_cast<std::size_t>(rng.uniform_index(size - i))]);
    idx.resize(std::min<std::size_t>(size, 8 * static_cast<std::size_t>(max_entries)));
  }
  return idx;
}

std::string param_name(const LayerSpec& l, std::size_t layer, std::size_t j) {
  std::string role = l.kind == LayerKind::PReLU ? "slope" : (j == 0 ? "weight" : "bias");
  return "layer" + std::to_string(layer) + "." + std::string(to_string(l.kind)) + "." + role;
}

}  // namespace

GradCheckReport grad_check(const ArchitectureSpec& spec, std::uint64_t seed, const GradCheckOptions& opt) {
  Shape in = opt.input;
  if (in.numel() == 0) in = spec.network_input(1, 4, 4);
  const auto shapes = spec.activation_shapes(in);

  // Seeded initialization, with biases and slopes randomized too so that
  // every parameter has a non-trivial gradient.
  Model model(spec, seed);
  {
    Rng rng(seed ^ 0x5eedULL);
    for (std::size_t l = 0; l < spec.layers.size(); ++l)
      for (std::size_t j = 0; j < model.params()[l].size(); ++j) {
        const bool is_weight = j == 0 && spec.layers[l].kind != LayerKind::PReLU;
        if (!is_weight)
          for (auto& v : model.params()[l][j].values()) v = rng.uniform(-0.1, 0.1) + (j == 0 ? 0.25 : 0.0);
      }
  }
  Rng rng(seed);
  Tensor x(in);
  // Symmetric so that every activation sees both of its branches.
  for (auto& v : x.values()) v = rng.uniform(-1.0, 1.0);
  Tensor r(shapes.back());
  for (auto& v : r.values()) v = rng.uniform(-1.0, 1.0);

  Tape tape;
  const Tensor y0 = model.forward(x, tape);
  const Gradients g = model.backward(tape, r);

  // Rounding in the forward pass perturbs the objective by about
  // eps * sum|r * y|, so a central difference cannot resolve derivatives much
  // below eps * sum|r * y| / h. Probes whose gradient is too small to be
  // certified at `resolvable_rel` are replaced like kink crossings.
  long double scale = 0.0L;
  for (std::size_t i = 0; i < y0.size(); ++i) scale += std::abs(static_cast<long double>(r[i]) * y0[i]);
  const double resolution = std::numeric_limits<double>::epsilon() * static_cast<double>(scale) / opt.h;
  const double min_magnitude = resolution / opt.resolvable_rel;

  GradCheckReport rep;
  rep.subject = spec.name;
  rep.resolution = resolution;
  // Perturbing layer l's parameters leaves acts[0..l] unchanged, so probes
  // only re-run the suffix; the input perturbs acts[0] and reruns everything.
  auto check = [&](const std::string& name, std::size_t first, Tensor& target, const Tensor& analytic) {
    GradCheckEntry e{name, target.size(), 0, 0, 0, 0.0, 0.0};
    for (std::size_t i : probe_indices(target.size(), opt.max_entries, rng)) {
      if (e.checked == static_cast<std::size_t>(opt.max_entries)) break;
      const double saved = target[i];
      Tape tp, tm;
      tp.acts.assign(tape.acts.begin(), tape.acts.begin() + static_cast<std::ptrdiff_t>(first) + 1);
      tm.acts = tp.acts;
      target[i] = saved + opt.h;
      if (first == 0) tp.acts[0] = x;
      const double fp = objective(model, first, r, tp);
      target[i] = saved - opt.h;
      if (first == 0) tm.acts[0] = x;
      const double fm = objective(model, first, r, tm);
      target[i] = saved;
      if (crossed_kink(spec, tp, tm)) {
        ++e.skipped;
        continue;
      }
      const double num = (fp - fm) / (2.0 * opt.h);
      const double a = analytic[i];
      if (std::max(std::abs(a), std::abs(num)) < min_magnitude) {
        ++e.unresolved;
        continue;
      }
      const double abs_err = std::abs(a - num);
      const double rel = abs_err / std::max({std::abs(a), std::abs(num), 1e-8});
      e.max_abs_error = std::max(e.max_abs_error, abs_err);
      e.max_rel_error = std::max(e.max_rel_error, rel);
      ++e.checked;
    }
    rep.max_rel_error = std::max(rep.max_rel_error, e.max_rel_error);
    rep.entries.push_back(e);
  };

  check("input", 0, x, g.input);
  for (std::size_t l = 0; l < spec.layers.size(); ++l)
    for (std::size_t j = 0; j < model.params()[l].size(); ++j)
      check(param_name(spec.layers[l], l, j), l, model.params()[l][j], g.params[l][j]);
  return rep;
}

GradCheckReport grad_check_layer(const LayerSpec& layer, std::uint64_t seed, const GradCheckOptions& opt) {
  ArchitectureSpec spec;
  spec.name = std::string(to_string(layer.kind));
  spec.input = InputConvention::NativeLr;
  GradCheckOptions o = opt;
  if (o.input.numel() == 0) o.input = Shape{1, 8, 5, 5};
  if (layer.kind == LayerKind::MaxPool) o.input.h = o.input.w = std::max(o.input.h, 6);
  spec.in_channels = o.input.c;
  LayerSpec l = layer;
  if (l.kind == LayerKind::AddSkip) l.skip_from = 0;
  spec.layers = {l};
  return grad_check(spec, seed, o);
}

}  // namespace pansr::nn
