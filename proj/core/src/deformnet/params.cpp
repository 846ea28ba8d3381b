#include "kpdeform/deformnet/params.hpp"

#include "kpdeform/core/error.hpp"
#include "kpdeform/core/types.hpp"

namespace kpd::deformnet {

using diffkit::Init;
using diffkit::ParamStore;

std::string pname::sa_weight(std::size_t layer) {
  return "sa.l" + std::to_string(layer) + ".weight";
}
std::string pname::sa_bias(std::size_t layer) { return "sa.l" + std::to_string(layer) + ".bias"; }

ParamStore init_model_params(const ModelConfig& config, const Ablation& ablation,
                             std::uint64_t seed) {
  config.validate();
  ParamStore store(seed);
  const auto& d = config.deform;
  if (ablation.use_deform) {
    store.add(pname::kEncoderWeight, {d.d_feat, kLocalInputDim}, Init::kGlorotUniform);
    store.add(pname::kEncoderBias, {d.d_feat}, Init::kZeros);
    store.add(pname::kOffset, {d.d_off, d.d_feat + 3}, Init::kGlorotUniform);
    store.add(pname::kAlign, {3, d.d_off},
              d.zero_align_init ? Init::kZeros : Init::kGlorotUniform);
  }
  std::size_t prev = kLocalInputDim;
  for (std::size_t l = 0; l < config.sa.mlp.size(); ++l) {
    store.add(pname::sa_weight(l), {config.sa.mlp[l], prev}, Init::kGlorotUniform);
    store.add(pname::sa_bias(l), {config.sa.mlp[l]}, Init::kZeros);
    prev = config.sa.mlp[l];
  }
  if (ablation.use_gate) {
    store.add(pname::kGate, {config.gate.d_out, config.gate.d_in}, Init::kGlorotUniform);
    store.add(pname::kGateBias, {config.gate.d_out}, Init::kZeros);
    store.add(pname::kFc, {config.gate.d_out, config.gate.d_in}, Init::kGlorotUniform);
  }
  const std::size_t head_in = head_input_dim(config, ablation);
  store.add(pname::kHeadWeight, {static_cast<std::size_t>(kNumClasses), head_in},
            Init::kGlorotUniform);
  store.add(pname::kHeadBias, {static_cast<std::size_t>(kNumClasses)}, Init::kZeros);
  return store;
}

Ablation infer_ablation(const ParamStore& params) {
  Ablation a;
  a.use_deform = params.contains(pname::kAlign);
  a.use_gate = params.contains(pname::kGate);
  return a;
}

void check_model_params(const ParamStore& params, const ModelConfig& config,
                        const Ablation& ablation) {
  const ParamStore expected = init_model_params(config, ablation, 0);
  for (const auto& [name, p] : expected.params()) {
    if (!params.contains(name)) {
      throw Error(Errc::kShapeMismatch, "model parameters lack '" + name + "'");
    }
    const auto& got = params.at(name).value;
    if (!got.same_shape(p.value)) {
      throw Error(Errc::kShapeMismatch, "parameter '" + name + "' has shape " +
                                            got.shape_string() + ", config implies " +
                                            p.value.shape_string());
    }
  }
}

}  // namespace kpd::deformnet
