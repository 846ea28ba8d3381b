#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kpdeform/core/types.hpp"
#include "kpdeform/deformnet/config.hpp"
#include "kpdeform/deformnet/model.hpp"
#include "kpdeform/diffkit/param.hpp"
#include "kpdeform/eval/average_precision.hpp"
#include "kpdeform/spatial/sampling.hpp"

namespace kpd::eval {

struct ScoredPrediction {
  Vec3 position;
  std::array<double, kNumClasses> scores{};  // softmax probabilities
  ClassId truth = ClassId::kBackground;
  double range = 0.0;  // horizontal distance from the sensor
};

enum class DistanceBin { kAll, kNear, kFar };  // all, [0, 30), [30, 50)

inline constexpr std::array<DistanceBin, 3> kBins{DistanceBin::kAll, DistanceBin::kNear,
                                                  DistanceBin::kFar};
inline constexpr std::array<RecallConvention, 2> kConventions{RecallConvention::kR11,
                                                              RecallConvention::kR40};

std::string_view bin_name(DistanceBin b) noexcept;
bool in_bin(DistanceBin b, double range) noexcept;

struct ApCell {
  ClassId cls = ClassId::kCarLike;
  DistanceBin bin = DistanceBin::kAll;
  RecallConvention convention = RecallConvention::kR40;
  std::size_t n_pos = 0;
  std::optional<double> ap;  // absent when the cell has no positives
};

struct EvalReport {
  std::string variant;
  std::size_t keypoints = 0;
  std::vector<ApCell> cells;  // class-major, then bin, then convention

  const ApCell& cell(ClassId cls, DistanceBin bin, RecallConvention convention) const;
};

// Scores every keypoint of a prepared scene.
std::vector<ScoredPrediction> predict(const deformnet::PreparedScene& scene,
                                      const diffkit::ParamStore& params,
                                      const deformnet::ModelConfig& config,
                                      const deformnet::Ablation& ablation);

// Per class c: rank the pool (optionally restricted to a distance bin) by
// scores[c], relevance = (truth == c), ties by pool position.
EvalReport evaluate_predictions(std::span<const ScoredPrediction> pool, std::string variant,
                                std::size_t keypoints);

EvalReport evaluate_model(std::span<const Scene> scenes, const diffkit::ParamStore& params,
                          const deformnet::ModelConfig& config,
                          const deformnet::Ablation& ablation, std::size_t keypoints,
                          spatial::SamplerKind sampler, std::uint64_t seed);

EvalReport evaluate_prepared(std::span<const deformnet::PreparedScene> scenes,
                             const diffkit::ParamStore& params,
                             const deformnet::ModelConfig& config,
                             const deformnet::Ablation& ablation);

// Header: variant,class,bin,convention,n_pos,ap ; ap at 6 decimals, "-" if absent.
std::string report_csv(std::span<const EvalReport> reports);

std::string format_fixed6(double v);

}  // namespace kpd::eval
