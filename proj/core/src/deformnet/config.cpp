#include "kpdeform/deformnet/config.hpp"

#include "kpdeform/core/error.hpp"

namespace kpd::deformnet {
namespace {
void require(bool ok, const std::string& key, const std::string& why) {
  if (!ok) throw Error(Errc::kConfig, key + ": " + why);
}
}  // namespace

void ModelConfig::validate() const {
  require(encoder.radius > 0.0, "encoder.radius", "must be > 0");
  require(encoder.max_samples >= 1, "encoder.max_samples", "must be >= 1");
  require(deform.k_def >= 1, "deform.k_def", "must be >= 1");
  require(deform.d_feat >= 1, "deform.d_feat", "must be >= 1");
  require(deform.d_off >= 1, "deform.d_off", "must be >= 1");
  require(deform.delta_max > 0.0, "deform.delta_max", "must be > 0");
  require(sa.radius > 0.0, "sa.radius", "must be > 0");
  require(sa.max_samples >= 1, "sa.max_samples", "must be >= 1");
  require(!sa.mlp.empty(), "sa.mlp", "needs at least one layer");
  for (std::size_t d : sa.mlp) require(d >= 1, "sa.mlp", "layer widths must be >= 1");
  require(gate.d_in == sa_output_dim(), "gate.d_in",
          "must equal the last sa.mlp width (" + std::to_string(sa_output_dim()) + ")");
  require(gate.d_out >= 1, "gate.d_out", "must be >= 1");
}

std::string variant_name(const Ablation& a) {
  if (a.use_deform && a.use_gate) return "deform_gate";
  if (a.use_deform) return "deform";
  if (a.use_gate) return "gate";
  return "baseline";
}

bool parse_variant(const std::string& name, Ablation& out) {
  for (bool d : {false, true}) {
    for (bool g : {false, true}) {
      Ablation a{d, g, false};
      if (variant_name(a) == name) {
        out = a;
        return true;
      }
    }
  }
  return false;
}

std::size_t head_input_dim(const ModelConfig& config, const Ablation& ablation) {
  return ablation.use_gate ? config.gate.d_out : config.sa_output_dim();
}

}  // namespace kpd::deformnet
