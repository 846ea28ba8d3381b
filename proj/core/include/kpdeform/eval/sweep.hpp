#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kpdeform/core/types.hpp"
#include "kpdeform/deformnet/config.hpp"
#include "kpdeform/spatial/sampling.hpp"

namespace kpd::eval {

inline constexpr std::size_t kDefaultSweepCounts[] = {512, 1024, 1536, 2048};

struct SweepRow {
  std::string variant;
  std::size_t count = 0;
  ClassId cls = ClassId::kCarLike;
  std::optional<double> ap;  // R40, all distances
};

// <dir>/<variant>_k<count>.dckpt
std::filesystem::path checkpoint_path(const std::filesystem::path& dir, const std::string& variant,
                                      std::size_t count);

// Evaluates the checkpoint trained for each (variant, count) at that keypoint
// count. Every checkpoint is checked for presence before any evaluation, so a
// missing one fails fast with kMissingCheckpoint.
std::vector<SweepRow> keypoint_count_sweep(const std::filesystem::path& checkpoint_dir,
                                           std::span<const std::string> variants,
                                           std::span<const std::size_t> counts,
                                           std::span<const Scene> scenes,
                                           const deformnet::ModelConfig& config,
                                           spatial::SamplerKind sampler, std::uint64_t seed);

// Header: variant,count,class,ap
std::string sweep_csv(std::span<const SweepRow> rows);

}  // namespace kpd::eval
