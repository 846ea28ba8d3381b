#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace kpd::deformnet {

// Local PointNet that produces the per-keypoint features f_i.
struct EncoderConfig {
  double radius = 1.0;
  std::size_t max_samples = 16;
};

struct DeformConfig {
  std::size_t k_def = 8;      // |N(i)|, neighbors among keypoints
  std::size_t d_feat = 16;    // keypoint feature dim
  std::size_t d_off = 16;     // offset feature dim
  double delta_max = 1.0;     // meters, per-axis displacement scale
  bool zero_align_init = true;  // start from the identity deformation
};

struct SAConfig {
  double radius = 0.8;
  std::size_t max_samples = 16;
  std::vector<std::size_t> mlp{16, 32};
};

struct GateConfig {
  std::size_t d_in = 32;
  std::size_t d_out = 32;
};

struct ModelConfig {
  EncoderConfig encoder;
  DeformConfig deform;
  SAConfig sa;
  GateConfig gate;

  std::size_t sa_output_dim() const { return sa.mlp.empty() ? 0 : sa.mlp.back(); }

  // Throws Error(kConfig) naming the offending key.
  void validate() const;
};

enum class GateMode {
  kOff,
  kOn,
  kBypass,  // g == 1: f^g = W_fc a
};

struct Ablation {
  bool use_deform = true;
  bool use_gate = true;
  bool gate_bypass = false;  // verification hook, only meaningful with use_gate

  GateMode gate_mode() const {
    if (!use_gate) return GateMode::kOff;
    return gate_bypass ? GateMode::kBypass : GateMode::kOn;
  }
};

// "baseline", "deform", "gate" or "deform_gate".
std::string variant_name(const Ablation& ablation);
bool parse_variant(const std::string& name, Ablation& out);

std::size_t head_input_dim(const ModelConfig& config, const Ablation& ablation);

// Per-point input of both local PointNets: relative xyz plus intensity.
inline constexpr std::size_t kLocalInputDim = 4;

}  // namespace kpd::deformnet
