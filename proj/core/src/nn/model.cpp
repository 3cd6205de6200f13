#include "pansr/nn/model.hpp"

#include <cmath>
#include <random>

#include "pansr/error.hpp"
#include "pansr/raster.hpp"
#include "pansr/rng.hpp"

namespace pansr::nn {

ParamSet zeros_like(const ParamSet& like) {
  ParamSet out(like.size());
  for (std::size_t i = 0; i < like.size(); ++i)
    for (const auto& t : like[i]) out[i].emplace_back(t.shape());
  return out;
}

void round_to_float(ParamSet& p) {
  for (auto& layer : p)
    for (auto& t : layer)
      for (auto& v : t.values()) v = static_cast<double>(static_cast<float>(v));
}

Model::Model(ArchitectureSpec spec, std::uint64_t seed) : spec_(std::move(spec)), init_{kInitScheme, seed} {
  spec_.validate(false);
  const auto shapes = spec_.activation_shapes(spec_.network_input(1, 8, 8));
  Rng rng(seed);
  params_.resize(spec_.layers.size());
  for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
    const LayerSpec& l = spec_.layers[i];
    const auto pshapes = layer_param_shapes(l, shapes[i]);
    for (const Shape& s : pshapes) params_[i].emplace_back(s);
    if (l.kind == LayerKind::Conv || l.kind == LayerKind::TransposedConv) {
      // A conv feeding straight into a residual sum starts scaled down, so the
      // stream does not grow with depth when there is no normalization.
      const bool residual_branch =
          i + 1 < spec_.layers.size() && spec_.layers[i + 1].kind == LayerKind::AddSkip;
      const double gain = residual_branch ? kResidualInitGain : 1.0;
      const double bound = gain * std::sqrt(6.0 / layer_fan_in(l, shapes[i]));
      for (auto& v : params_[i][0].values()) v = rng.uniform(-bound, bound);
    } else if (l.kind == LayerKind::PReLU) {
      params_[i][0].fill(0.25);
    }
  }
  round_to_float(params_);
}

Model::Model(ArchitectureSpec spec, ParamSet params, InitRecord init)
    : spec_(std::move(spec)), params_(std::move(params)), init_(std::move(init)) {
  spec_.validate(false);
  check_params();
}

void Model::check_params() const {
  const auto shapes = spec_.activation_shapes(spec_.network_input(1, 8, 8));
  if (params_.size() != spec_.layers.size())
    throw ValidationError(spec_.name + ": parameter table has " + std::to_string(params_.size()) +
                          " layers, expected " + std::to_string(spec_.layers.size()));
  for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
    const auto want = layer_param_shapes(spec_.layers[i], shapes[i]);
    bool ok = want.size() == params_[i].size();
    for (std::size_t j = 0; ok && j < want.size(); ++j) ok = params_[i][j].shape() == want[j];
    if (!ok) throw ValidationError(spec_.name + ": parameter shapes of layer " + std::to_string(i) + " do not match");
  }
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : params_)
    for (const auto& t : layer) n += t.size();
  return n;
}

Tensor Model::forward(const Tensor& x) const {
  Tape tape;
  return forward(x, tape);
}

Tensor Model::forward(const Tensor& x, Tape& tape) const {
  spec_.activation_shapes(x.shape());
  tape.acts.clear();
  tape.acts.reserve(spec_.layers.size() + 1);
  tape.acts.push_back(x);
  return forward_from(0, tape);
}

Tensor Model::forward_from(std::size_t first, Tape& tape) const {
  if (first > spec_.layers.size() || tape.acts.size() <= first)
    throw ValidationError("forward_from: tape does not cover layer " + std::to_string(first));
  tape.acts.resize(first + 1);
  for (std::size_t i = first; i < spec_.layers.size(); ++i) {
    const LayerSpec& l = spec_.layers[i];
    const Tensor* skip = l.kind == LayerKind::AddSkip ? &tape.acts[l.skip_from] : nullptr;
    Tensor y = layer_forward(l, tape.acts.back(), params_[i], skip);
    if (!y.all_finite())
      throw NumericError(spec_.name + ": non-finite activation after layer " + std::to_string(i) + " (" +
                             std::string(to_string(l.kind)) + ")",
                         static_cast<int>(i));
    tape.acts.push_back(std::move(y));
  }
  return tape.acts.back();
}

Gradients Model::backward(const Tape& tape, const Tensor& grad_out) const {
  const std::size_t n_layers = spec_.layers.size();
  if (tape.acts.size() != n_layers + 1) throw ValidationError("backward: tape does not match the model");
  if (!(grad_out.shape() == tape.acts.back().shape()))
    throw ValidationError("backward: gradient shape " + grad_out.shape().str() + " does not match output " +
                          tape.acts.back().shape().str());
  Gradients g{zeros_like(params_), {}};
  // Gradient accumulators per activation; skips add into earlier slots.
  std::vector<Tensor> ga(n_layers + 1);
  ga[n_layers] = grad_out;
  for (std::size_t i = n_layers; i-- > 0;) {
    const LayerSpec& l = spec_.layers[i];
    Tensor gx;
    layer_backward(l, tape.acts[i], params_[i], ga[i + 1], gx, g.params[i]);
    if (l.kind == LayerKind::AddSkip) {
      Tensor& dst = ga[l.skip_from];
      if (dst.size() == 0) dst = Tensor(tape.acts[l.skip_from].shape());
      const Tensor& src = ga[i + 1];
      for (std::size_t k = 0; k < src.size(); ++k) dst[k] += src[k];
    }
    if (ga[i].size() == 0) {
      ga[i] = std::move(gx);
    } else {
      for (std::size_t k = 0; k < gx.size(); ++k) ga[i][k] += gx[k];
    }
    ga[i + 1] = Tensor();
  }
  g.input = std::move(ga[0]);
  return g;
}

Tensor upsample_bicubic(const Tensor& lr, int factor) {
  const Shape s = lr.shape();
  Tensor out(Shape{s.n, s.c, s.h * factor, s.w * factor});
  ResampleSpec spec;
  spec.factor = factor;
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c) {
      Plane p(s.w, s.h);
      std::copy_n(lr.sample_ptr(n) + c * s.plane(), s.plane(), p.values().data());
      const Plane up = resample(p, spec, ResampleDirection::Up);
      std::copy(up.values().begin(), up.values().end(), out.sample_ptr(n) + c * out.shape().plane());
    }
  return out;
}

Tensor Model::prepare_input(const Tensor& lr) const {
  return spec_.input == InputConvention::PreUpsampled ? upsample_bicubic(lr) : lr;
}

Tensor Model::forward_lr(const Tensor& lr) const { return forward(prepare_input(lr)); }

}  // namespace pansr::nn
