#include <benchmark/benchmark.h>

#include "kpdeform/deformnet/model.hpp"
#include "kpdeform/deformnet/params.hpp"
#include "kpdeform/synth/generator.hpp"

namespace {

using namespace kpd;

struct Fixture {
  deformnet::ModelConfig config;
  deformnet::PreparedScene scene;
  diffkit::ParamStore params;

  Fixture(const deformnet::Ablation& ablation, std::size_t keypoints)
      : scene(deformnet::prepare_scene(synth::generate_scene({}, 0), config,
                                       spatial::SamplerKind::kFarthestPoint, keypoints, 1)),
        params(deformnet::init_model_params(config, ablation, 1)) {}
};

const deformnet::Ablation kVariants[] = {{false, false, false}, {true, false, false}, {true, true, false}};

void BM_Forward(benchmark::State& state) {
  const auto& ablation = kVariants[state.range(0)];
  Fixture f(ablation, static_cast<std::size_t>(state.range(1)));
  state.SetLabel(deformnet::variant_name(ablation));
  for (auto _ : state) {
    benchmark::DoNotOptimize(deformnet::forward(f.scene, f.params, f.config, ablation).scores);
  }
}
BENCHMARK(BM_Forward)->ArgsProduct({{0, 1, 2}, {512, 2048}})->Unit(benchmark::kMillisecond);

void BM_ForwardBackward(benchmark::State& state) {
  const auto& ablation = kVariants[state.range(0)];
  Fixture f(ablation, 512);
  state.SetLabel(deformnet::variant_name(ablation));
  for (auto _ : state) {
    const auto fwd = deformnet::forward(f.scene, f.params, f.config, ablation);
    f.params.zero_grad();
    benchmark::DoNotOptimize(deformnet::loss_and_backward(fwd, f.scene, f.params, f.config));
  }
}
BENCHMARK(BM_ForwardBackward)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_PrepareScene(benchmark::State& state) {
  const Scene s = synth::generate_scene({}, 0);
  const deformnet::ModelConfig config;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        deformnet::prepare_scene(s, config, spatial::SamplerKind::kFarthestPoint, 512, 1));
  }
}
BENCHMARK(BM_PrepareScene)->Unit(benchmark::kMillisecond);

void BM_GenerateScene(benchmark::State& state) {
  std::uint32_t id = 0;
  for (auto _ : state) benchmark::DoNotOptimize(synth::generate_scene({}, id++));
}
BENCHMARK(BM_GenerateScene)->Unit(benchmark::kMillisecond);

}  // namespace
