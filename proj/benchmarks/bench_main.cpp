#include <benchmark/benchmark.h>

#include "pansr/dataset.hpp"
#include "pansr/metrics.hpp"
#include "pansr/nn.hpp"
#include "pansr/pansharp.hpp"
#include "pansr/rng.hpp"

namespace {

pansr::RasterImage noisy_copy(const pansr::RasterImage& img, double sigma, std::uint64_t seed) {
  pansr::Rng rng(seed);
  pansr::RasterImage out = img;
  for (auto& b : out.bands)
    for (auto& v : b.values()) v += sigma * rng.normal();
  return out.quantized();
}

void BM_Sfim(benchmark::State& state) {
  const auto scene = pansr::synth_scene(1, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(pansr::sfim(scene.ms, scene.pan));
  state.SetItemsProcessed(state.iterations() * scene.pan.width * scene.pan.height);
}
BENCHMARK(BM_Sfim)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Ssim(benchmark::State& state) {
  const auto scene = pansr::synth_scene(2, static_cast<int>(state.range(0)));
  const auto other = noisy_copy(scene.ms, 40.0, 3);
  for (auto _ : state) benchmark::DoNotOptimize(pansr::metrics::ssim(scene.ms, other));
}
BENCHMARK(BM_Ssim)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_Fsim(benchmark::State& state) {
  const auto scene = pansr::synth_scene(4, static_cast<int>(state.range(0)));
  const auto other = noisy_copy(scene.ms, 40.0, 5);
  for (auto _ : state) benchmark::DoNotOptimize(pansr::metrics::fsim(scene.ms, other));
}
BENCHMARK(BM_Fsim)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_Issm(benchmark::State& state) {
  const auto scene = pansr::synth_scene(6, static_cast<int>(state.range(0)));
  const auto other = noisy_copy(scene.ms, 40.0, 7);
  for (auto _ : state) benchmark::DoNotOptimize(pansr::metrics::issm(scene.ms, other));
}
BENCHMARK(BM_Issm)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

// Forward + backward of one conv layer at the sizes SRCNN's first layer sees.
void BM_ConvForwardBackward(benchmark::State& state) {
  using namespace pansr::nn;
  const int side = static_cast<int>(state.range(0));
  const LayerSpec l = LayerSpec::conv(static_cast<int>(state.range(1)), 64);
  const Shape in{1, 4, side, side};
  pansr::Rng rng(8);
  std::vector<Tensor> params;
  for (const Shape& s : layer_param_shapes(l, in)) {
    Tensor t(s);
    for (auto& v : t.values()) v = rng.uniform(-0.1, 0.1);
    params.push_back(std::move(t));
  }
  std::vector<Tensor> grads;
  for (const auto& p : params) grads.emplace_back(p.shape());
  Tensor x(in);
  for (auto& v : x.values()) v = rng.uniform01();
  for (auto _ : state) {
    const Tensor y = layer_forward(l, x, params);
    Tensor gx;
    layer_backward(l, x, params, y, gx, grads);
    benchmark::DoNotOptimize(gx.data());
  }
}
BENCHMARK(BM_ConvForwardBackward)->Args({32, 3})->Args({128, 9})->Unit(benchmark::kMillisecond);

void BM_InferTiled(benchmark::State& state) {
  using namespace pansr::nn;
  const Model model(build_architecture("srcnn"), 9);
  const auto scene = pansr::synth_scene(10, static_cast<int>(state.range(0)));
  const Tensor lr = pansr::normalize(scene.ms);
  for (auto _ : state) benchmark::DoNotOptimize(infer_tiled(model, lr));
}
BENCHMARK(BM_InferTiled)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
