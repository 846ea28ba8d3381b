#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "kpdeform/core/types.hpp"

namespace kpd {

// .dscene layout, little-endian, no padding:
//   "DFRM" | version u16 | scene_id u32 | point_count u32 | label_count u16
//   | point_count x (x, y, z, intensity : f64)
//   | label_count x (class u8, center f64x3, size f64x3, yaw f64)
inline constexpr std::uint16_t kSceneFormatVersion = 1;
inline constexpr std::size_t kSceneHeaderBytes = 4 + 2 + 4 + 4 + 2;
inline constexpr std::size_t kScenePointBytes = 4 * 8;
inline constexpr std::size_t kSceneLabelBytes = 1 + 7 * 8;

std::vector<std::uint8_t> encode_scene(const Scene& scene);

// Throws Error with kBadMagic, kTruncated or kInvariantViolation.
Scene decode_scene(std::span<const std::uint8_t> bytes);

Scene read_scene_file(const std::filesystem::path& path);
void write_scene_file(const std::filesystem::path& path, const Scene& scene);

}  // namespace kpd
