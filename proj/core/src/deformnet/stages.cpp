#include "kpdeform/deformnet/stages.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kpdeform/core/error.hpp"

namespace kpd::deformnet {

using diffkit::Activation;
using diffkit::EmptyGroupPolicy;
using diffkit::Pool;

LocalGroups build_local_groups(const CloudView& cloud, std::span<const Vec3> centers,
                               double radius, std::size_t max_samples, std::uint64_t seed) {
  LocalGroups g;
  g.neighbors = spatial::radius_group(*cloud.grid, centers, radius, max_samples, seed);
  g.input = Tensor({g.neighbors.lists.total(), kLocalInputDim});
  std::size_t row = 0;
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const auto members = g.neighbors[c];
    for (std::size_t p : members) {
      const Vec3 rel = cloud.grid->point(p) - centers[c];
      auto r = g.input.row(row++);
      r[0] = rel.x;
      r[1] = rel.y;
      r[2] = rel.z;
      r[3] = cloud.intensity[p];
    }
    g.rows.offsets.push_back(row);
  }
  g.rows.indices.resize(row);
  for (std::size_t i = 0; i < row; ++i) g.rows.indices[i] = i;
  return g;
}

Tensor center_grad_from_input_grad(const LocalGroups& groups, const Tensor& grad_input) {
  Tensor out({groups.rows.size(), 3});
  for (std::size_t c = 0; c < groups.rows.size(); ++c) {
    auto o = out.row(c);
    for (std::size_t r : groups.rows[c]) {
      const auto gi = grad_input.row(r);
      o[0] -= gi[0];
      o[1] -= gi[1];
      o[2] -= gi[2];
    }
  }
  return out;
}

EncodeResult encode_keypoints(const CloudView& cloud, std::span<const Vec3> positions,
                              const EncoderConfig& config, const Tensor& weight,
                              const Tensor& bias, std::uint64_t seed) {
  EncodeResult r;
  r.groups = build_local_groups(cloud, positions, config.radius, config.max_samples, seed);
  r.pre = diffkit::linear(r.groups.input, weight, &bias);
  r.act = diffkit::activate(Activation::kRelu, r.pre);
  r.pooled = diffkit::pool_over_set(Pool::kMax, r.groups.rows, r.act,
                                    EmptyGroupPolicy::kZeroFallback);
  r.features = r.pooled.output;
  return r;
}

EncodeGrads encode_backward(const EncodeResult& fwd, const Tensor& grad_features,
                            const Tensor& weight) {
  const Tensor grad_act = diffkit::pool_over_set_backward(Pool::kMax, fwd.groups.rows, fwd.pooled,
                                                          grad_features, fwd.act.rows());
  const Tensor grad_pre = diffkit::activate_backward(Activation::kRelu, grad_act, fwd.pre, fwd.act);
  auto lin = diffkit::linear_backward(grad_pre, fwd.groups.input, weight, true);
  return {std::move(lin.weight), std::move(*lin.bias)};
}

EdgeResult edge_offset_features(const Tensor& features, std::span<const Vec3> positions,
                                const spatial::NeighborSet& neighbors, const Tensor& w_offset) {
  const std::size_t n = positions.size();
  const std::size_t d = features.cols();
  if (n <= neighbors.k) {
    throw Error(Errc::kTooFewKeypoints, std::to_string(n) + " keypoints, need more than k_def=" +
                                            std::to_string(neighbors.k));
  }
  if (features.rows() != n || neighbors.size() != n) {
    throw Error(Errc::kShapeMismatch, "edge_offset_features: features " +
                                          features.shape_string() + " for " + std::to_string(n) +
                                          " keypoints");
  }
  EdgeResult r;
  r.edge_input = Tensor({neighbors.lists.total(), d + 3});
  r.edge_owner.reserve(neighbors.lists.total());
  r.edge_neighbor.reserve(neighbors.lists.total());
  std::vector<std::size_t> sorted;
  std::size_t row = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sorted.assign(neighbors[i].begin(), neighbors[i].end());
    std::sort(sorted.begin(), sorted.end());
    const auto fi = features.row(i);
    for (std::size_t j : sorted) {
      const auto fj = features.row(j);
      auto u = r.edge_input.row(row++);
      for (std::size_t c = 0; c < d; ++c) u[c] = fi[c] - fj[c];
      const Vec3 dv = positions[i] - positions[j];
      u[d] = dv.x;
      u[d + 1] = dv.y;
      u[d + 2] = dv.z;
      r.edge_owner.push_back(i);
      r.edge_neighbor.push_back(j);
    }
    r.edges.offsets.push_back(row);
  }
  r.edges.indices.resize(row);
  for (std::size_t e = 0; e < row; ++e) r.edges.indices[e] = e;
  r.edge_out = diffkit::linear(r.edge_input, w_offset);
  r.mean = diffkit::pool_over_set(Pool::kMean, r.edges, r.edge_out, EmptyGroupPolicy::kReject);
  r.offset = diffkit::activate(Activation::kRelu, r.mean.output);
  return r;
}

EdgeGrads edge_offset_backward(const EdgeResult& fwd, const Tensor& grad_offset,
                               const Tensor& w_offset, std::size_t d_feat) {
  const std::size_t n = fwd.offset.rows();
  const Tensor grad_mean =
      diffkit::activate_backward(Activation::kRelu, grad_offset, fwd.mean.output, fwd.offset);
  const Tensor grad_edge = diffkit::pool_over_set_backward(Pool::kMean, fwd.edges, fwd.mean,
                                                           grad_mean, fwd.edge_out.rows());
  auto lin = diffkit::linear_backward(grad_edge, fwd.edge_input, w_offset, false);
  EdgeGrads g{Tensor({n, d_feat}), Tensor({n, 3}), std::move(lin.weight)};
  for (std::size_t e = 0; e < fwd.edge_owner.size(); ++e) {
    const std::size_t i = fwd.edge_owner[e], j = fwd.edge_neighbor[e];
    const auto gu = lin.input.row(e);
    auto gfi = g.features.row(i);
    auto gfj = g.features.row(j);
    for (std::size_t c = 0; c < d_feat; ++c) {
      gfi[c] += gu[c];
      gfj[c] -= gu[c];
    }
    auto gvi = g.positions.row(i);
    auto gvj = g.positions.row(j);
    for (std::size_t c = 0; c < 3; ++c) {
      gvi[c] += gu[d_feat + c];
      gvj[c] -= gu[d_feat + c];
    }
  }
  return g;
}

Tensor positions_to_tensor(std::span<const Vec3> positions) {
  Tensor t({positions.size(), 3});
  for (std::size_t i = 0; i < positions.size(); ++i) {
    t.at(i, 0) = positions[i].x;
    t.at(i, 1) = positions[i].y;
    t.at(i, 2) = positions[i].z;
  }
  return t;
}

DeformResult deform_positions(std::span<const Vec3> positions, const Tensor& offset,
                              const Tensor& w_align, double delta_max) {
  if (w_align.rank() != 2 || w_align.rows() != 3 || offset.rows() != positions.size()) {
    throw Error(Errc::kShapeMismatch, "deform_positions: w_align " + w_align.shape_string() +
                                          ", offset " + offset.shape_string());
  }
  DeformResult r;
  r.pre = diffkit::linear(offset, w_align);
  r.squash = Tensor(r.pre.shape());
  for (std::size_t i = 0; i < r.pre.size(); ++i) {
    r.squash[i] = std::clamp(std::tanh(r.pre[i]), -kTanhCeiling, kTanhCeiling);
  }
  r.deformed.resize(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const auto t = r.squash.row(i);
    r.deformed[i] = {positions[i].x + delta_max * t[0], positions[i].y + delta_max * t[1],
                     positions[i].z + delta_max * t[2]};
  }
  return r;
}

DeformGrads deform_backward(const DeformResult& fwd, const Tensor& grad_deformed,
                            const Tensor& offset, const Tensor& w_align, double delta_max) {
  Tensor grad_pre(fwd.pre.shape());
  for (std::size_t i = 0; i < grad_pre.size(); ++i) {
    const double t = fwd.squash[i];
    const bool saturated = std::abs(t) >= kTanhCeiling;
    grad_pre[i] = saturated ? 0.0 : grad_deformed[i] * delta_max * (1.0 - t * t);
  }
  auto lin = diffkit::linear_backward(grad_pre, offset, w_align, false);
  return {std::move(lin.input), std::move(lin.weight)};
}

SAResult set_abstraction(const CloudView& cloud, std::span<const Vec3> centers,
                         const SAConfig& config, const MlpWeights& mlp, std::uint64_t seed) {
  if (mlp.weights.size() != config.mlp.size() || mlp.biases.size() != config.mlp.size()) {
    throw Error(Errc::kShapeMismatch, "set_abstraction: weight count does not match sa.mlp");
  }
  SAResult r;
  r.groups = build_local_groups(cloud, centers, config.radius, config.max_samples, seed);
  Tensor x = r.groups.input;
  for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
    r.inputs.push_back(x);
    r.pre.push_back(diffkit::linear(x, mlp.weights[l], &mlp.biases[l]));
    r.act.push_back(diffkit::activate(Activation::kRelu, r.pre.back()));
    x = r.act.back();
  }
  r.pooled = diffkit::pool_over_set(Pool::kMax, r.groups.rows, x, EmptyGroupPolicy::kZeroFallback);
  r.features = r.pooled.output;
  return r;
}

SAGrads set_abstraction_backward(const SAResult& fwd, const Tensor& grad_features,
                                 const MlpWeights& mlp) {
  const std::size_t layers = mlp.weights.size();
  SAGrads g;
  g.mlp.weights.resize(layers);
  g.mlp.biases.resize(layers);
  Tensor grad = diffkit::pool_over_set_backward(Pool::kMax, fwd.groups.rows, fwd.pooled,
                                                grad_features, fwd.act.back().rows());
  for (std::size_t l = layers; l-- > 0;) {
    const Tensor grad_pre =
        diffkit::activate_backward(Activation::kRelu, grad, fwd.pre[l], fwd.act[l]);
    auto lin = diffkit::linear_backward(grad_pre, fwd.inputs[l], mlp.weights[l], true);
    g.mlp.weights[l] = std::move(lin.weight);
    g.mlp.biases[l] = std::move(*lin.bias);
    grad = std::move(lin.input);
  }
  g.centers = center_grad_from_input_grad(fwd.groups, grad);
  return g;
}

GateResult context_gate(const Tensor& a, const Tensor& w_gate, const Tensor& b_gate,
                        const Tensor& w_fc, GateMode mode) {
  if (w_gate.shape() != w_fc.shape()) {
    throw Error(Errc::kShapeMismatch, "context_gate: W_gate " + w_gate.shape_string() +
                                          " vs W_fc " + w_fc.shape_string());
  }
  GateResult r;
  r.fc = diffkit::linear(a, w_fc);
  if (mode == GateMode::kBypass) {
    r.gate = Tensor(r.fc.shape(), 1.0);
    r.out = r.fc;
    return r;
  }
  r.pre_gate = diffkit::linear(a, w_gate, &b_gate);
  Tensor clipped = r.pre_gate;
  for (double& x : clipped.values()) x = std::clamp(x, -kGateSaturation, kGateSaturation);
  r.gate = diffkit::activate(Activation::kSigmoid, clipped);
  r.out = diffkit::hadamard(r.gate, r.fc);
  return r;
}

GateGrads context_gate_backward(const GateResult& fwd, const Tensor& grad_out, const Tensor& a,
                                const Tensor& w_gate, const Tensor& w_fc, GateMode mode) {
  GateGrads g;
  if (mode == GateMode::kBypass) {
    auto lf = diffkit::linear_backward(grad_out, a, w_fc, false);
    g.input = std::move(lf.input);
    g.w_fc = std::move(lf.weight);
    g.w_gate = Tensor(w_gate.shape());
    g.b_gate = Tensor({w_gate.rows()});
    return g;
  }
  const auto h = diffkit::hadamard_backward(grad_out, fwd.gate, fwd.fc);
  Tensor grad_pre =
      diffkit::activate_backward(Activation::kSigmoid, h.a, fwd.pre_gate, fwd.gate);
  for (std::size_t i = 0; i < grad_pre.size(); ++i) {
    if (std::abs(fwd.pre_gate[i]) > kGateSaturation) grad_pre[i] = 0.0;
  }
  auto lg = diffkit::linear_backward(grad_pre, a, w_gate, true);
  auto lf = diffkit::linear_backward(h.b, a, w_fc, false);
  g.input = std::move(lg.input);
  g.input += lf.input;
  g.w_gate = std::move(lg.weight);
  g.b_gate = std::move(*lg.bias);
  g.w_fc = std::move(lf.weight);
  return g;
}

}  // namespace kpd::deformnet
