#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "kpdeform/core/ragged.hpp"
#include "kpdeform/core/vec3.hpp"
#include "kpdeform/deformnet/config.hpp"
#include "kpdeform/diffkit/ops.hpp"
#include "kpdeform/diffkit/tensor.hpp"
#include "kpdeform/spatial/grid_index.hpp"
#include "kpdeform/spatial/queries.hpp"

namespace kpd::deformnet {

using diffkit::Tensor;

// Raw cloud as seen by the local PointNets.
struct CloudView {
  const spatial::GridIndex* grid = nullptr;
  std::span<const double> intensity;
};

// Rows of (point - center, intensity) for every grouped point, one Ragged row
// per center listing its input rows. Groups hold point indices ascending.
struct LocalGroups {
  spatial::NeighborSet neighbors;
  Ragged rows;
  Tensor input;  // [total x 4]
};

LocalGroups build_local_groups(const CloudView& cloud, std::span<const Vec3> centers,
                               double radius, std::size_t max_samples, std::uint64_t seed);

// The relative coordinates depend on the centers; given fixed group
// membership, d input / d center = -I on the xyz columns.
Tensor center_grad_from_input_grad(const LocalGroups& groups, const Tensor& grad_input);

// ---------------------------------------------------------------- encoder

struct EncodeResult {
  Tensor features;  // [n x d_feat]; zero row when the neighborhood is empty
  LocalGroups groups;
  Tensor pre;
  Tensor act;
  diffkit::PoolResult pooled;
};

EncodeResult encode_keypoints(const CloudView& cloud, std::span<const Vec3> positions,
                              const EncoderConfig& config, const Tensor& weight,
                              const Tensor& bias, std::uint64_t seed);

struct EncodeGrads {
  Tensor weight;
  Tensor bias;
};
EncodeGrads encode_backward(const EncodeResult& fwd, const Tensor& grad_features,
                            const Tensor& weight);

// ------------------------------------------------------ offset features

// u_ij = [f_i - f_j ; v_i - v_j], f'_i = relu(mean_j W_offset u_ij).
struct EdgeResult {
  Tensor offset;      // [n x d_off]
  Ragged edges;       // per keypoint, its edge rows (neighbors ascending)
  Tensor edge_input;  // [n*k x (d_feat+3)]
  Tensor edge_out;    // W_offset u_ij
  std::vector<std::size_t> edge_owner;     // i for each edge row
  std::vector<std::size_t> edge_neighbor;  // j for each edge row
  diffkit::PoolResult mean;
};

// Throws kTooFewKeypoints unless positions.size() > neighbors' k.
EdgeResult edge_offset_features(const Tensor& features, std::span<const Vec3> positions,
                                const spatial::NeighborSet& neighbors, const Tensor& w_offset);

struct EdgeGrads {
  Tensor features;   // [n x d_feat]
  Tensor positions;  // [n x 3]
  Tensor w_offset;
};
EdgeGrads edge_offset_backward(const EdgeResult& fwd, const Tensor& grad_offset,
                               const Tensor& w_offset, std::size_t d_feat);

// ------------------------------------------------------- deformation

// v'_i = v_i + delta_max * tanh(W_align f'_i). The tanh is saturated just
// inside +-1 so |v' - v|_inf < delta_max holds in floating point.
inline constexpr double kTanhCeiling = 1.0 - 1e-12;

struct DeformResult {
  std::vector<Vec3> deformed;
  Tensor pre;     // W_align f' [n x 3]
  Tensor squash;  // saturated tanh(pre)
};

DeformResult deform_positions(std::span<const Vec3> positions, const Tensor& offset,
                              const Tensor& w_align, double delta_max);

struct DeformGrads {
  Tensor offset;
  Tensor w_align;
};
DeformGrads deform_backward(const DeformResult& fwd, const Tensor& grad_deformed,
                            const Tensor& offset, const Tensor& w_align, double delta_max);

Tensor positions_to_tensor(std::span<const Vec3> positions);

// -------------------------------------------------- set abstraction

struct MlpWeights {
  std::vector<Tensor> weights;
  std::vector<Tensor> biases;
};

struct SAResult {
  Tensor features;  // [n x mlp.back()]; zero row for an empty group
  LocalGroups groups;
  std::vector<Tensor> inputs;  // per layer
  std::vector<Tensor> pre;
  std::vector<Tensor> act;
  diffkit::PoolResult pooled;
};

SAResult set_abstraction(const CloudView& cloud, std::span<const Vec3> centers,
                         const SAConfig& config, const MlpWeights& mlp, std::uint64_t seed);

struct SAGrads {
  MlpWeights mlp;
  Tensor centers;  // [n x 3]
};
SAGrads set_abstraction_backward(const SAResult& fwd, const Tensor& grad_features,
                                 const MlpWeights& mlp);

// ------------------------------------------------------ context gate

// g = sigmoid(W_gate a + b_gate), f^g = g (.) W_fc a. The pre-activation is
// clipped to +-kGateSaturation so g stays strictly inside (0, 1).
inline constexpr double kGateSaturation = 36.0;

struct GateResult {
  Tensor out;
  Tensor gate;
  Tensor pre_gate;
  Tensor fc;
};

GateResult context_gate(const Tensor& a, const Tensor& w_gate, const Tensor& b_gate,
                        const Tensor& w_fc, GateMode mode = GateMode::kOn);

struct GateGrads {
  Tensor input;
  Tensor w_gate;
  Tensor b_gate;
  Tensor w_fc;
};
GateGrads context_gate_backward(const GateResult& fwd, const Tensor& grad_out, const Tensor& a,
                                const Tensor& w_gate, const Tensor& w_fc,
                                GateMode mode = GateMode::kOn);

}  // namespace kpd::deformnet
