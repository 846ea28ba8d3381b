#pragma once

#include <cstdint>
#include <string>

#include "kpdeform/deformnet/config.hpp"
#include "kpdeform/diffkit/param.hpp"

namespace kpd::deformnet {

namespace pname {
inline const std::string kEncoderWeight = "encoder.weight";
inline const std::string kEncoderBias = "encoder.bias";
inline const std::string kOffset = "deform.w_offset";  // [d_off x (d_feat + 3)]
inline const std::string kAlign = "deform.w_align";    // [3 x d_off], no bias
inline const std::string kGate = "gate.w_gate";        // [d_out x d_in]
inline const std::string kGateBias = "gate.b_gate";    // [d_out]
inline const std::string kFc = "gate.w_fc";            // [d_out x d_in], no bias
inline const std::string kHeadWeight = "head.weight";  // [4 x head_in]
inline const std::string kHeadBias = "head.bias";
std::string sa_weight(std::size_t layer);
std::string sa_bias(std::size_t layer);
}  // namespace pname

// Creates exactly the parameters the ablation uses. Because each parameter is
// seeded by name, shared parameters are identical across variants for a seed.
diffkit::ParamStore init_model_params(const ModelConfig& config, const Ablation& ablation,
                                      std::uint64_t seed);

// Reads the variant back from which parameters a store holds.
Ablation infer_ablation(const diffkit::ParamStore& params);

// Throws Error(kShapeMismatch) when a required parameter is missing or has
// the wrong shape for `config`.
void check_model_params(const diffkit::ParamStore& params, const ModelConfig& config,
                        const Ablation& ablation);

}  // namespace kpd::deformnet
