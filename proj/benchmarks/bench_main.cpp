#include <benchmark/benchmark.h>

#include <random>

#include "glpd/loss.hpp"
#include "glpd/model.hpp"
#include "glpd/ops.hpp"
#include "glpd/sphere.hpp"
#include "glpd/synth.hpp"

using namespace glpd;

namespace {

Tensor random_tensor(Shape s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> v(numel(s));
  for (auto& x : v) x = d(rng);
  return Tensor(std::move(s), std::move(v));
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor a = random_tensor({n, n}, 1), b = random_tensor({n, n}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(128)->Arg(256);

void BM_Conv3x3(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  const Tensor x = random_tensor({c, 32, 64}, 3), w = random_tensor({c, c, 3, 3}, 4);
  for (auto _ : state) benchmark::DoNotOptimize(conv2d(x, w, std::nullopt, 1, 1));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * c * c * 9 * 32 * 64));
}
BENCHMARK(BM_Conv3x3)->Arg(16)->Arg(64);

void BM_EquirectToCubemap(benchmark::State& state) {
  const auto h = static_cast<std::size_t>(state.range(0));
  const Tensor img = random_tensor({3, h, 2 * h}, 5);
  Tape::Pause pause;
  for (auto _ : state) benchmark::DoNotOptimize(resample_equirect_to_cubemap(img));
}
BENCHMARK(BM_EquirectToCubemap)->Arg(64)->Arg(256);

void BM_TinyForward(benchmark::State& state) {
  const GLPanoDepth model(ModelConfig::tiny(), 1);
  const Tensor pano = random_tensor({3, 64, 128}, 6);
  Tape::Pause pause;
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(pano));
}
BENCHMARK(BM_TinyForward)->Unit(benchmark::kMillisecond);

void BM_TinyTrainStep(benchmark::State& state) {
  GLPanoDepth model(ModelConfig::tiny(), 1);
  const PanoSample s = synth_generate(SceneSpec{}, 3);
  for (auto _ : state) {
    model.params().zero_grad();
    Tape tape;
    Tape::Scope scope(tape);
    backward(berhu_loss(model.forward(s.rgb).depth, s.depth, s.mask), tape);
  }
}
BENCHMARK(BM_TinyTrainStep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
