#include <benchmark/benchmark.h>

#include <random>

#include "metamer/descriptors.hpp"
#include "metamer/pipeline.hpp"
#include "metamer/pyramid.hpp"
#include "metamer/synthesis.hpp"

using namespace metamer;

namespace {

Plane noise(int w, int h) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Plane p(w, h);
  for (double& v : p.data) v = u(rng);
  return p;
}

ImageBuffer gray_noise(int n) { return ImageBuffer::from_planes({noise(n, n)}, ColorSpace::Gray); }

void BM_BuildPyramid(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Plane p = noise(n, n);
  PyramidConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(build_pyramid(p, cfg));
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_BuildPyramid)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_PooledStatistics(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ImageBuffer img = gray_noise(n);
  const PyramidConfig cfg;
  const auto geom = PoolingGeometry::uniform(32);
  for (auto _ : state) benchmark::DoNotOptimize(compute_pooled_statistics(img, cfg, geom));
}
BENCHMARK(BM_PooledStatistics)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Gradient(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const PyramidConfig cfg;
  const auto geom = PoolingGeometry::uniform(32);
  const PooledStatistics target = compute_pooled_statistics(gray_noise(n), cfg, geom);
  const std::vector<double> w = loss_weights(target);
  const ImageBuffer x = ImageBuffer::from_planes({noise(n, n)}, ColorSpace::Gray);
  for (auto _ : state) benchmark::DoNotOptimize(gradient(x, target, w, cfg));
}
BENCHMARK(BM_Gradient)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Descriptors(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Plane p = noise(n, n);
  DescriptorConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(measure_descriptors(p, cfg));
}
BENCHMARK(BM_Descriptors)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
