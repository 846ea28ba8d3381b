#include "kpdeform/deformnet/trainer.hpp"

#include <numeric>

#include "kpdeform/core/error.hpp"
#include "kpdeform/core/rng.hpp"
#include "kpdeform/deformnet/params.hpp"

namespace kpd::deformnet {

std::vector<PreparedScene> prepare_scenes(std::span<const Scene> scenes,
                                          const ModelConfig& config,
                                          spatial::SamplerKind sampler, std::size_t keypoints,
                                          std::uint64_t seed) {
  std::vector<PreparedScene> out;
  out.reserve(scenes.size());
  for (const auto& s : scenes) out.push_back(prepare_scene(s, config, sampler, keypoints, seed));
  return out;
}

TrainResult train_prepared(std::span<const PreparedScene> scenes, const ModelConfig& config,
                           const Ablation& ablation, const TrainConfig& train,
                           const EpochCallback& on_epoch) {
  if (scenes.empty()) throw Error(Errc::kConfig, "train: no training scenes");
  if (train.batch_scenes == 0) throw Error(Errc::kConfig, "train.batch_scenes: must be >= 1");
  TrainResult result{init_model_params(config, ablation, train.seed), {}};
  diffkit::AdamConfig adam;
  adam.lr = train.lr;

  std::vector<std::size_t> order(scenes.size());
  for (std::size_t epoch = 0; epoch < train.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(mix_seed(train.seed, 0x45504f43ULL + epoch));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);

    double total = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += train.batch_scenes) {
      const std::size_t end = std::min(order.size(), begin + train.batch_scenes);
      const double scale = 1.0 / static_cast<double>(end - begin);
      for (std::size_t b = begin; b < end; ++b) {
        const PreparedScene& s = scenes[order[b]];
        const ForwardResult fwd = forward(s, result.params, config, ablation);
        total += loss_and_backward(fwd, s, result.params, config, scale);
      }
      diffkit::adam_step(result.params, adam);
    }
    const double mean = total / static_cast<double>(scenes.size());
    result.epoch_loss.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
  return result;
}

TrainResult train_model(std::span<const Scene> scenes, const ModelConfig& config,
                        const Ablation& ablation, const TrainConfig& train,
                        const EpochCallback& on_epoch) {
  const auto prepared = prepare_scenes(scenes, config, train.sampler, train.keypoints, train.seed);
  return train_prepared(prepared, config, ablation, train, on_epoch);
}

}  // namespace kpd::deformnet
