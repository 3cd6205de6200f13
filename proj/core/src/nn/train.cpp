#include "pansr/nn/train.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "pansr/error.hpp"
#include "pansr/parallel.hpp"
#include "pansr/rng.hpp"

namespace pansr::nn {

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw ValidationError("learning rate must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw ValidationError("Adam betas must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw ValidationError("Adam epsilon must be positive");
  if (batch_size < 1) throw ValidationError("batch size must be >= 1");
  if (max_steps < 0) throw ValidationError("max steps must be >= 0");
  if (checkpoint_interval < 0) throw ValidationError("checkpoint interval must be >= 0");
  if (eval_interval < 1) throw ValidationError("eval interval must be >= 1");
  if (patch_lr < 0) throw ValidationError("patch size must be >= 0");
}

std::vector<TrainSample> make_samples(const Model& model, const std::vector<TilePair>& pairs) {
  std::vector<TrainSample> out(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) {
    const auto& p = pairs[i];
    if (p.hr.width != p.lr.width * kSrScale || p.hr.height != p.lr.height * kSrScale)
      throw ValidationError("tile pair " + p.scene_id + " is not a x4 pair");
    out[i] = {model.prepare_input(normalize(p.lr)), normalize(p.hr)};
  });
  return out;
}

double mse_loss(const Model& model, const std::vector<TrainSample>& samples) {
  if (samples.empty()) return 0.0;
  std::vector<double> sums(samples.size());
  std::vector<std::size_t> counts(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) {
    const Tensor y = model.forward(samples[i].input);
    double s = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
      const double d = y[k] - samples[i].target[k];
      s += d * d;
    }
    sums[i] = s;
    counts[i] = y.size();
  });
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    s += sums[i];
    n += counts[i];
  }
  return s / static_cast<double>(n);
}

Adam::Adam(const ParamSet& like, const TrainConfig& cfg)
    : lr_(cfg.learning_rate), b1_(cfg.beta1), b2_(cfg.beta2), eps_(cfg.epsilon), m_(zeros_like(like)),
      v_(zeros_like(like)) {}

void Adam::step(ParamSet& params, const ParamSet& grads) {
  ++t_;
  const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  for (std::size_t l = 0; l < params.size(); ++l)
    for (std::size_t j = 0; j < params[l].size(); ++j) {
      auto p = params[l][j].values();
      const auto g = grads[l][j].values();
      auto m = m_[l][j].values();
      auto v = v_[l][j].values();
      for (std::size_t k = 0; k < p.size(); ++k) {
        m[k] = b1_ * m[k] + (1.0 - b1_) * g[k];
        v[k] = b2_ * v[k] + (1.0 - b2_) * g[k] * g[k];
        const double mh = m[k] / c1, vh = v[k] / c2;
        p[k] = static_cast<double>(static_cast<float>(p[k] - lr_ * mh / (std::sqrt(vh) + eps_)));
      }
    }
}

namespace {

Tensor crop_tensor(const Tensor& t, int x0, int y0, int size) {
  const Shape s = t.shape();
  Tensor out(Shape{1, s.c, size, size});
  for (int c = 0; c < s.c; ++c)
    for (int y = 0; y < size; ++y)
      std::copy_n(t.data() + t.index(0, c, y0 + y, x0), size, out.data() + out.index(0, c, y, 0));
  return out;
}

// Draws batches from a seeded per-epoch shuffle, with aligned random crops.
class BatchSampler {
 public:
  BatchSampler(const Model& model, const std::vector<TrainSample>& set, const TrainConfig& cfg)
      : set_(set), cfg_(cfg), rng_(cfg.seed), pre_(model.spec().input == InputConvention::PreUpsampled) {
    order_.resize(set.size());
    pos_ = order_.size();
  }

  std::vector<TrainSample> next() {
    std::vector<TrainSample> batch;
    for (int b = 0; b < cfg_.batch_size; ++b) {
      if (pos_ == order_.size()) {
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        rng_.shuffle(order_);
        pos_ = 0;
      }
      const TrainSample& s = set_[order_[pos_++]];
      if (cfg_.patch_lr == 0) {
        batch.push_back(s);
        continue;
      }
      const int hr_h = s.target.shape().h, hr_w = s.target.shape().w;
      const int lr_h = hr_h / kSrScale, lr_w = hr_w / kSrScale;
      const int p = cfg_.patch_lr;
      if (p > lr_h || p > lr_w)
        throw ValidationError("patch size " + std::to_string(p) + " exceeds LR tile " + std::to_string(lr_w) + "x" +
                              std::to_string(lr_h));
      const int x = static_cast<int>(rng_.uniform_index(static_cast<std::uint64_t>(lr_w - p + 1)));
      const int y = static_cast<int>(rng_.uniform_index(static_cast<std::uint64_t>(lr_h - p + 1)));
      TrainSample c;
      c.target = crop_tensor(s.target, x * kSrScale, y * kSrScale, p * kSrScale);
      c.input = pre_ ? crop_tensor(s.input, x * kSrScale, y * kSrScale, p * kSrScale) : crop_tensor(s.input, x, y, p);
      batch.push_back(std::move(c));
    }
    return batch;
  }

 private:
  const std::vector<TrainSample>& set_;
  const TrainConfig& cfg_;
  Rng rng_;
  bool pre_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
};

struct BatchResult {
  double loss = 0.0;
  ParamSet grads;
};

// Per-sample forward/backward in groups of the worker count; gradients are
// summed in sample order.
BatchResult batch_gradient(const Model& model, const std::vector<TrainSample>& batch) {
  std::size_t total = 0;
  for (const auto& s : batch) total += s.target.size();
  const double scale = 2.0 / static_cast<double>(total);
  BatchResult r{0.0, zeros_like(model.params())};
  const std::size_t group = static_cast<std::size_t>(std::max(1, thread_count()));
  for (std::size_t g0 = 0; g0 < batch.size(); g0 += group) {
    const std::size_t g1 = std::min(batch.size(), g0 + group);
    std::vector<ParamSet> grads(g1 - g0);
    std::vector<double> losses(g1 - g0);
    parallel_for(g1 - g0, [&](std::size_t k) {
      const TrainSample& s = batch[g0 + k];
      Tape tape;
      const Tensor y = model.forward(s.input, tape);
      if (!(y.shape() == s.target.shape()))
        throw ValidationError("model output " + y.shape().str() + " does not match target " + s.target.shape().str());
      Tensor gy(y.shape());
      double sq = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = y[i] - s.target[i];
        sq += d * d;
        gy[i] = scale * d;
      }
      losses[k] = sq;
      grads[k] = model.backward(tape, gy).params;
    });
    for (std::size_t k = 0; k < grads.size(); ++k) {
      r.loss += losses[k];
      for (std::size_t l = 0; l < r.grads.size(); ++l)
        for (std::size_t j = 0; j < r.grads[l].size(); ++j) {
          auto dst = r.grads[l][j].values();
          const auto src = grads[k][l][j].values();
          for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
        }
    }
  }
  r.loss /= static_cast<double>(total);
  return r;
}

}  // namespace

std::vector<HistoryEntry> train(Model& model, const std::vector<TrainSample>& train_set,
                                const std::vector<TrainSample>& val_set, const TrainConfig& cfg,
                                const TrainCallbacks& callbacks) {
  cfg.validate();
  if (train_set.empty()) throw ValidationError("training split is empty");
  BatchSampler sampler(model, train_set, cfg);
  Adam adam(model.params(), cfg);
  std::vector<HistoryEntry> history;

  auto emit = [&](HistoryEntry e) {
    if (!val_set.empty()) e.val_loss = mse_loss(model, val_set);
    history.push_back(e);
    if (callbacks.on_entry) callbacks.on_entry(history.back());
  };
  auto diverged = [&](int step, const std::string& why, int layer) {
    if (callbacks.on_checkpoint) callbacks.on_checkpoint(step, model);
    throw NumericError("training diverged at step " + std::to_string(step) + ": " + why, layer);
  };

  double acc = 0.0;
  int acc_n = 0;
  for (int step = 1; step <= cfg.max_steps; ++step) {
    BatchResult br;
    try {
      br = batch_gradient(model, sampler.next());
    } catch (const NumericError& e) {
      diverged(step - 1, e.what(), e.layer());
    }
    if (!std::isfinite(br.loss)) diverged(step - 1, "loss is not finite", -1);
    if (step == 1) emit({0, br.loss, std::nullopt});
    adam.step(model.params(), br.grads);
    acc += br.loss;
    ++acc_n;
    if (step % cfg.eval_interval == 0 || step == cfg.max_steps) {
      emit({step, acc / acc_n, std::nullopt});
      acc = 0.0;
      acc_n = 0;
    }
    if (callbacks.on_checkpoint && cfg.checkpoint_interval > 0 && step % cfg.checkpoint_interval == 0 &&
        step != cfg.max_steps)
      callbacks.on_checkpoint(step, model);
  }
  if (cfg.max_steps == 0) emit({0, mse_loss(model, train_set), std::nullopt});
  if (callbacks.on_checkpoint) callbacks.on_checkpoint(cfg.max_steps, model);
  return history;
}

void write_history(const std::filesystem::path& path, const Model& model, const TrainConfig& cfg,
                   const std::vector<HistoryEntry>& history) {
  nlohmann::ordered_json j;
  j["architecture"] = model.spec().name;
  j["init"] = {{"scheme", model.init().scheme}, {"seed", model.init().seed}};
  j["config"] = {{"learning_rate", cfg.learning_rate}, {"beta1", cfg.beta1},         {"beta2", cfg.beta2},
                 {"epsilon", cfg.epsilon},             {"batch_size", cfg.batch_size}, {"max_steps", cfg.max_steps},
                 {"seed", cfg.seed},                   {"patch_lr", cfg.patch_lr},   {"eval_interval", cfg.eval_interval}};
  j["history"] = nlohmann::json::array();
  for (const auto& e : history) {
    nlohmann::ordered_json r{{"step", e.step}, {"train_loss", e.train_loss}};
    r["val_loss"] = e.val_loss ? nlohmann::json(*e.val_loss) : nlohmann::json(nullptr);
    j["history"].push_back(std::move(r));
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path.string());
  f << j.dump(2) << '\n';
}

}  // namespace pansr::nn
