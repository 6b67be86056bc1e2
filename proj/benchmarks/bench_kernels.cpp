#include <benchmark/benchmark.h>

#include <random>

#include "hsipnp/admm.hpp"
#include "hsipnp/conv3d.hpp"
#include "hsipnp/grcnn.hpp"
#include "hsipnp/metrics.hpp"
#include "hsipnp/synthetic.hpp"

using namespace hsipnp;

namespace {

FeatureTensor random_tensor(std::size_t channels, Extent e, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  FeatureTensor t(channels, e);
  for (double& v : t.data()) v = u(rng);
  return t;
}

void BM_Conv3d(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = random_tensor(8, {n, n, 8}, 1);
  Kernel3d k(8, 8, 3, 3, 3);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 0.1);
  for (double& w : k.weights()) w = g(rng);
  for (auto _ : state) benchmark::DoNotOptimize(conv3d(x, k));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(8 * n * n * 8));
}
BENCHMARK(BM_Conv3d)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_GrconvForward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  grcnn::GrconvUnit unit(4, 4, 3, grcnn::Direction::Bidirectional);
  std::mt19937_64 rng(3);
  unit.initialize(rng);
  const auto x = random_tensor(4, {n, n, 8}, 4);
  for (auto _ : state) benchmark::DoNotOptimize(unit.forward(x));
}
BENCHMARK(BM_GrconvForward)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_ModelForward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const grcnn::GrcnnModel model(grcnn::Architecture{}, 5);
  const Cube x = synthetic_scene({n, n, 8}, 6);
  for (auto _ : state) benchmark::DoNotOptimize(grcnn::denoise(model, x, 25.0));
}
BENCHMARK(BM_ModelForward)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_ModelBackward(benchmark::State& state) {
  const grcnn::GrcnnModel model(grcnn::Architecture{}, 7);
  const Cube x = synthetic_scene({16, 16, 8}, 8);
  const auto pass = model.forward_cached(x, grcnn::NoiseLevelMap{25.0});
  for (auto _ : state) benchmark::DoNotOptimize(model.backward(pass, x));
}
BENCHMARK(BM_ModelBackward)->Unit(benchmark::kMillisecond);

void BM_XUpdateSr(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const degrade::TaskOperator op = degrade::SuperRes(degrade::Kernel2d::gaussian(8, 3.0), 2);
  const Cube gt = synthetic_scene({n, n, 8}, 9);
  const Cube y = degrade::apply(op, gt);
  for (auto _ : state) benchmark::DoNotOptimize(admm::x_update(op, y, gt, 10.0));
}
BENCHMARK(BM_XUpdateSr)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_XUpdateCs(benchmark::State& state) {
  const degrade::TaskOperator op = degrade::Sensing::cassi(64, 64, 8, 10);
  const Cube gt = synthetic_scene({64, 64, 8}, 11);
  const Cube y = degrade::apply(op, gt);
  for (auto _ : state) benchmark::DoNotOptimize(admm::x_update(op, y, gt, 10.0));
}
BENCHMARK(BM_XUpdateCs)->Unit(benchmark::kMicrosecond);

void BM_Ssim(benchmark::State& state) {
  const Cube a = synthetic_scene({64, 64, 8}, 12);
  const Cube b = synthetic_scene({64, 64, 8}, 13);
  for (auto _ : state) benchmark::DoNotOptimize(metrics::ssim(a, b));
}
BENCHMARK(BM_Ssim)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
