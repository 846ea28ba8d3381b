#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "kpdeform/core/types.hpp"
#include "kpdeform/deformnet/config.hpp"
#include "kpdeform/deformnet/stages.hpp"
#include "kpdeform/diffkit/param.hpp"
#include "kpdeform/spatial/grid_index.hpp"
#include "kpdeform/spatial/sampling.hpp"

namespace kpd::deformnet {

// One scene with its keypoint sample, ready for repeated forward passes.
// Holds grid indices for both local PointNet radii.
struct PreparedScene {
  std::uint32_t scene_id = 0;
  std::vector<Vec3> points;
  std::vector<double> intensity;
  spatial::GridIndex encoder_grid;
  spatial::GridIndex sa_grid;
  std::vector<std::size_t> keypoint_indices;
  std::vector<Vec3> keypoints;
  std::vector<ClassId> truth;   // label of each keypoint position v_i
  std::uint64_t group_seed = 0;  // radius-group subsampling stream

  CloudView encoder_view() const { return {&encoder_grid, intensity}; }
  CloudView sa_view() const { return {&sa_grid, intensity}; }
};

// Uses the given keypoint indices into scene.cloud.
PreparedScene prepare_scene(const Scene& scene, std::vector<std::size_t> keypoint_indices,
                            const ModelConfig& config, std::uint64_t group_seed);

// Samples min(keypoints, cloud size) keypoints with the sampler, all streams
// derived from (seed, scene_id).
PreparedScene prepare_scene(const Scene& scene, const ModelConfig& config,
                            spatial::SamplerKind sampler, std::size_t keypoints,
                            std::uint64_t seed);

struct ForwardResult {
  Tensor scores;  // [n x 4] logits: CarLike, PedestrianLike, CyclistLike, Background
  std::vector<Vec3> deformed;

  std::optional<EncodeResult> encoded;
  std::optional<spatial::NeighborSet> deform_neighbors;
  std::optional<EdgeResult> edges;
  std::optional<DeformResult> deform;
  SAResult sa;
  std::optional<GateResult> gate;
  Tensor head_input;
  Ablation ablation;
};

// encode -> [edge offsets -> deform] -> set abstraction -> [gate] -> head.
// Stages disabled by the ablation are skipped and their parameters unused.
ForwardResult forward(const PreparedScene& scene, const diffkit::ParamStore& params,
                      const ModelConfig& config, const Ablation& ablation);

MlpWeights sa_weights(const diffkit::ParamStore& params, const ModelConfig& config);

// Mean softmax cross-entropy; fills grad_scores (d loss / d scores, already
// divided by n) when non-null. Throws kNonFinite on a NaN/Inf loss.
double softmax_cross_entropy(const Tensor& scores, std::span<const ClassId> truth,
                             Tensor* grad_scores);

std::vector<double> softmax_row(std::span<const double> logits);

// Computes the loss of a forward pass and adds grad_scale * d loss / d param
// into every parameter's grad. Returns the (unscaled) loss.
double loss_and_backward(const ForwardResult& fwd, const PreparedScene& scene,
                         diffkit::ParamStore& params, const ModelConfig& config,
                         double grad_scale = 1.0);

// Backward from an arbitrary upstream gradient on the scores.
void backward_from_scores(const ForwardResult& fwd, const Tensor& grad_scores,
                          diffkit::ParamStore& params,
                          const ModelConfig& config, double grad_scale = 1.0);

}  // namespace kpd::deformnet
