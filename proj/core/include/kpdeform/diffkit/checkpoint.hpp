#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "kpdeform/diffkit/param.hpp"

namespace kpd::diffkit {

// .dckpt layout, little-endian:
//   "DCKP" | version u16 | entry_count u32
//   | entries sorted by name: name_len u16 | name (UTF-8) | rank u8
//     | dims u32 x rank | values f64 x prod(dims)
// Only parameter values are stored; optimizer state is not.
inline constexpr std::uint16_t kCheckpointVersion = 1;

std::vector<std::uint8_t> encode_checkpoint(const ParamStore& store);
ParamStore decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const ParamStore& store);
// Throws kMissingCheckpoint when the file does not exist.
ParamStore load_checkpoint(const std::filesystem::path& path);

}  // namespace kpd::diffkit
