#include <benchmark/benchmark.h>

#include <algorithm>
#include <vector>

#include "kpdeform/core/rng.hpp"
#include "kpdeform/spatial/grid_index.hpp"
#include "kpdeform/spatial/queries.hpp"
#include "kpdeform/spatial/sampling.hpp"

namespace {

using kpd::Vec3;

std::vector<Vec3> cloud(std::size_t n, std::uint64_t seed) {
  kpd::Rng rng(seed);
  std::vector<Vec3> p(n);
  for (auto& v : p) v = {rng.uniform(0, 50), rng.uniform(-25, 25), rng.uniform(-2, 1)};
  return p;
}

void BM_GridBuild(benchmark::State& state) {
  const auto pts = cloud(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) {
    kpd::spatial::GridIndex grid(pts, 0.8);
    benchmark::DoNotOptimize(grid.occupied_cells());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GridBuild)->Arg(4096)->Arg(16384);

void BM_Fps(benchmark::State& state) {
  const auto pts = cloud(16384, 2);
  const auto k = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(kpd::spatial::farthest_point_sampling(pts, k, 0));
  }
}
BENCHMARK(BM_Fps)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);

void BM_KnnGrid(benchmark::State& state) {
  const auto pts = cloud(static_cast<std::size_t>(state.range(0)), 3);
  const auto queries = cloud(512, 4);
  const auto grid = kpd::spatial::GridIndex::for_knn(pts);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kpd::spatial::knn_query(grid, queries, 8));
  }
  state.SetItemsProcessed(state.iterations() * 512);
}
BENCHMARK(BM_KnnGrid)->Arg(2048)->Arg(16384);

// Full scan with a partial sort, the reference the grid query must beat.
void BM_KnnBruteForce(benchmark::State& state) {
  const auto pts = cloud(static_cast<std::size_t>(state.range(0)), 3);
  const auto queries = cloud(512, 4);
  std::vector<std::pair<double, std::size_t>> d(pts.size());
  for (auto _ : state) {
    for (const auto& q : queries) {
      for (std::size_t i = 0; i < pts.size(); ++i) d[i] = {kpd::squared_distance(pts[i], q), i};
      std::partial_sort(d.begin(), d.begin() + 8, d.end());
      benchmark::DoNotOptimize(d[0]);
    }
  }
  state.SetItemsProcessed(state.iterations() * 512);
}
BENCHMARK(BM_KnnBruteForce)->Arg(2048)->Arg(16384);

void BM_RadiusGroup(benchmark::State& state) {
  const auto pts = cloud(16384, 5);
  const auto centers = cloud(512, 6);
  const double radius = 0.8;
  const kpd::spatial::GridIndex grid(pts, radius);
  const auto cap = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(kpd::spatial::radius_group(grid, centers, radius, cap, 7));
  }
  state.SetItemsProcessed(state.iterations() * 512);
}
BENCHMARK(BM_RadiusGroup)->Arg(16)->Arg(64);

}  // namespace
