#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "kpdeform/core/types.hpp"
#include "kpdeform/deformnet/config.hpp"
#include "kpdeform/deformnet/model.hpp"
#include "kpdeform/diffkit/adam.hpp"
#include "kpdeform/diffkit/param.hpp"
#include "kpdeform/spatial/sampling.hpp"

namespace kpd::deformnet {

struct TrainConfig {
  std::size_t epochs = 10;
  double lr = 3e-3;
  std::size_t batch_scenes = 4;
  std::uint64_t seed = 1;
  std::size_t keypoints = 2048;
  spatial::SamplerKind sampler = spatial::SamplerKind::kFarthestPoint;
};

struct TrainResult {
  diffkit::ParamStore params;
  std::vector<double> epoch_loss;  // mean per-scene loss of each epoch
};

using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

// Adam over the scenes in a per-epoch shuffled order (seeded), one optimizer
// step per batch of batch_scenes scenes with gradients averaged over the
// batch. Keypoint samples are drawn once per scene from (seed, scene_id).
TrainResult train_model(std::span<const Scene> scenes, const ModelConfig& config,
                        const Ablation& ablation, const TrainConfig& train,
                        const EpochCallback& on_epoch = {});

// Same, over scenes already prepared with keypoints.
TrainResult train_prepared(std::span<const PreparedScene> scenes, const ModelConfig& config,
                           const Ablation& ablation, const TrainConfig& train,
                           const EpochCallback& on_epoch = {});

std::vector<PreparedScene> prepare_scenes(std::span<const Scene> scenes,
                                          const ModelConfig& config,
                                          spatial::SamplerKind sampler, std::size_t keypoints,
                                          std::uint64_t seed);

}  // namespace kpd::deformnet
