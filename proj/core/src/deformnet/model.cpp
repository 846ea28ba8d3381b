#include "kpdeform/deformnet/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kpdeform/core/error.hpp"
#include "kpdeform/core/labeling.hpp"
#include "kpdeform/core/rng.hpp"
#include "kpdeform/deformnet/params.hpp"
#include "kpdeform/diffkit/ops.hpp"

namespace kpd::deformnet {

using diffkit::ParamStore;

namespace {
constexpr std::uint64_t kEncoderStream = 0x454e43;
constexpr std::uint64_t kSAStream = 0x5341;

void accumulate(ParamStore& params, const std::string& name, const Tensor& grad, double scale) {
  auto& g = params.at(name).grad;
  require_same_shape(g, grad, name.c_str());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += scale * grad[i];
}
}  // namespace

PreparedScene prepare_scene(const Scene& scene, std::vector<std::size_t> keypoint_indices,
                            const ModelConfig& config, std::uint64_t group_seed) {
  config.validate();
  std::vector<Vec3> points = positions_of(scene.cloud);
  PreparedScene p{
      scene.scene_id,
      points,
      {},
      spatial::GridIndex(points, config.encoder.radius),
      spatial::GridIndex(points, config.sa.radius),
      std::move(keypoint_indices),
      {},
      {},
      group_seed,
  };
  p.intensity.reserve(scene.cloud.size());
  for (const auto& pt : scene.cloud) p.intensity.push_back(pt.intensity);
  p.keypoints.reserve(p.keypoint_indices.size());
  for (std::size_t i : p.keypoint_indices) {
    if (i >= points.size()) throw Error(Errc::kShapeMismatch, "keypoint index out of range");
    p.keypoints.push_back(points[i]);
  }
  p.truth = label_keypoints(p.keypoints, scene.labels);
  return p;
}

PreparedScene prepare_scene(const Scene& scene, const ModelConfig& config,
                            spatial::SamplerKind sampler, std::size_t keypoints,
                            std::uint64_t seed) {
  const std::vector<Vec3> points = positions_of(scene.cloud);
  const std::size_t k = std::min(keypoints, points.size());
  const std::uint64_t scene_seed = mix_seed(seed, scene.scene_id);
  auto indices = spatial::sample_keypoints(sampler, points, k, scene_seed);
  return prepare_scene(scene, std::move(indices), config, mix_seed(scene_seed, 0x475250));
}

MlpWeights sa_weights(const ParamStore& params, const ModelConfig& config) {
  MlpWeights w;
  for (std::size_t l = 0; l < config.sa.mlp.size(); ++l) {
    w.weights.push_back(params.value(pname::sa_weight(l)));
    w.biases.push_back(params.value(pname::sa_bias(l)));
  }
  return w;
}

ForwardResult forward(const PreparedScene& scene, const ParamStore& params,
                      const ModelConfig& config, const Ablation& ablation) {
  ForwardResult r;
  r.ablation = ablation;
  const std::size_t n = scene.keypoints.size();
  if (ablation.use_deform) {
    if (n <= config.deform.k_def) {
      throw Error(Errc::kTooFewKeypoints, std::to_string(n) + " keypoints, need more than k_def=" +
                                              std::to_string(config.deform.k_def));
    }
    r.encoded = encode_keypoints(scene.encoder_view(), scene.keypoints, config.encoder,
                                 params.value(pname::kEncoderWeight),
                                 params.value(pname::kEncoderBias),
                                 mix_seed(scene.group_seed, kEncoderStream));
    r.deform_neighbors = spatial::knn_excluding_self(scene.keypoints, config.deform.k_def);
    r.edges = edge_offset_features(r.encoded->features, scene.keypoints, *r.deform_neighbors,
                                   params.value(pname::kOffset));
    r.deform = deform_positions(scene.keypoints, r.edges->offset, params.value(pname::kAlign),
                                config.deform.delta_max);
    r.deformed = r.deform->deformed;
  } else {
    r.deformed = scene.keypoints;
  }

  r.sa = set_abstraction(scene.sa_view(), r.deformed, config.sa, sa_weights(params, config),
                         mix_seed(scene.group_seed, kSAStream));

  if (ablation.use_gate) {
    r.gate = context_gate(r.sa.features, params.value(pname::kGate),
                          params.value(pname::kGateBias), params.value(pname::kFc),
                          ablation.gate_mode());
    r.head_input = r.gate->out;
  } else {
    r.head_input = r.sa.features;
  }
  const Tensor& head_b = params.value(pname::kHeadBias);
  r.scores = diffkit::linear(r.head_input, params.value(pname::kHeadWeight), &head_b);
  return r;
}

std::vector<double> softmax_row(std::span<const double> logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double z = 0.0;
  for (std::size_t c = 0; c < logits.size(); ++c) {
    p[c] = std::exp(logits[c] - m);
    z += p[c];
  }
  for (double& v : p) v /= z;
  return p;
}

double softmax_cross_entropy(const Tensor& scores, std::span<const ClassId> truth,
                             Tensor* grad_scores) {
  const std::size_t n = scores.rows(), c = scores.cols();
  if (truth.size() != n) {
    throw Error(Errc::kShapeMismatch, "cross entropy: " + std::to_string(truth.size()) +
                                          " labels for " + std::to_string(n) + " rows");
  }
  if (n == 0) throw Error(Errc::kShapeMismatch, "cross entropy over zero keypoints");
  if (grad_scores) *grad_scores = Tensor(scores.shape());
  double loss = 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = scores.row(i);
    const double m = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (double v : row) z += std::exp(v - m);
    const std::size_t t = static_cast<std::size_t>(truth[i]);
    loss += (m + std::log(z)) - row[t];
    if (grad_scores) {
      auto g = grad_scores->row(i);
      for (std::size_t k = 0; k < c; ++k) {
        g[k] = std::exp(row[k] - m) / z * inv_n;
      }
      g[t] -= inv_n;
    }
  }
  loss *= inv_n;
  if (!std::isfinite(loss)) throw Error(Errc::kNonFinite, "loss is not finite");
  return loss;
}

void backward_from_scores(const ForwardResult& fwd, const Tensor& grad_scores,
                          ParamStore& params,
                          const ModelConfig& config, double grad_scale) {
  const Ablation& ab = fwd.ablation;
  auto head = diffkit::linear_backward(grad_scores, fwd.head_input,
                                       params.value(pname::kHeadWeight), true);
  accumulate(params, pname::kHeadWeight, head.weight, grad_scale);
  accumulate(params, pname::kHeadBias, *head.bias, grad_scale);

  Tensor grad_a;
  if (ab.use_gate) {
    auto gg = context_gate_backward(*fwd.gate, head.input, fwd.sa.features,
                                    params.value(pname::kGate), params.value(pname::kFc),
                                    ab.gate_mode());
    accumulate(params, pname::kGate, gg.w_gate, grad_scale);
    accumulate(params, pname::kGateBias, gg.b_gate, grad_scale);
    accumulate(params, pname::kFc, gg.w_fc, grad_scale);
    grad_a = std::move(gg.input);
  } else {
    grad_a = std::move(head.input);
  }

  const MlpWeights mlp = sa_weights(params, config);
  auto sg = set_abstraction_backward(fwd.sa, grad_a, mlp);
  for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
    accumulate(params, pname::sa_weight(l), sg.mlp.weights[l], grad_scale);
    accumulate(params, pname::sa_bias(l), sg.mlp.biases[l], grad_scale);
  }

  if (!ab.use_deform) return;
  auto dg = deform_backward(*fwd.deform, sg.centers, fwd.edges->offset,
                            params.value(pname::kAlign), config.deform.delta_max);
  accumulate(params, pname::kAlign, dg.w_align, grad_scale);
  auto eg = edge_offset_backward(*fwd.edges, dg.offset, params.value(pname::kOffset),
                                 config.deform.d_feat);
  accumulate(params, pname::kOffset, eg.w_offset, grad_scale);
  auto enc = encode_backward(*fwd.encoded, eg.features, params.value(pname::kEncoderWeight));
  accumulate(params, pname::kEncoderWeight, enc.weight, grad_scale);
  accumulate(params, pname::kEncoderBias, enc.bias, grad_scale);
}

double loss_and_backward(const ForwardResult& fwd, const PreparedScene& scene, ParamStore& params,
                         const ModelConfig& config, double grad_scale) {
  Tensor grad_scores;
  const double loss = softmax_cross_entropy(fwd.scores, scene.truth, &grad_scores);
  backward_from_scores(fwd, grad_scores, params, config, grad_scale);
  return loss;
}

}  // namespace kpd::deformnet
