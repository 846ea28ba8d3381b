#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "kpdeform/core/vec3.hpp"

namespace kpd::spatial {

enum class SamplerKind { kFarthestPoint, kUniformRandom };

std::string_view sampler_name(SamplerKind kind) noexcept;
std::optional<SamplerKind> parse_sampler(std::string_view name) noexcept;

// Greedy farthest point sampling. The first index is drawn uniformly from
// `seed`; each later pick maximizes the minimum distance to the picks so far,
// ties to the lowest index. Throws kKTooLarge when k > points.size().
std::vector<std::size_t> farthest_point_sampling(std::span<const Vec3> points, std::size_t k,
                                                 std::uint64_t seed);

// Same greedy rule with a caller-chosen first index.
std::vector<std::size_t> farthest_point_sampling_from(std::span<const Vec3> points,
                                                      std::size_t k, std::size_t first);

// k distinct indices drawn uniformly without replacement, in draw order.
std::vector<std::size_t> random_sampling(std::size_t n, std::size_t k, std::uint64_t seed);

std::vector<std::size_t> sample_keypoints(SamplerKind kind, std::span<const Vec3> points,
                                          std::size_t k, std::uint64_t seed);

}  // namespace kpd::spatial
