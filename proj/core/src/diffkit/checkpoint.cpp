#include "kpdeform/diffkit/checkpoint.hpp"

#include <limits>

#include "kpdeform/core/bytes.hpp"
#include "kpdeform/core/error.hpp"

namespace kpd::diffkit {
namespace {
constexpr std::string_view kMagic = "DCKP";
}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const ParamStore& store) {
  ByteWriter w;
  w.raw(kMagic);
  w.u16(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(store.size()));
  for (const auto& [name, p] : store.params()) {  // std::map: sorted by name
    if (name.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw Error(Errc::kInvariantViolation, "parameter name too long");
    }
    w.u16(static_cast<std::uint16_t>(name.size()));
    w.raw(name);
    const auto& shape = p.value.shape();
    w.u8(static_cast<std::uint8_t>(shape.size()));
    for (std::size_t d : shape) w.u32(static_cast<std::uint32_t>(d));
    for (double v : p.value.values()) w.f64(v);
  }
  return std::move(w).take();
}

ParamStore decode_checkpoint(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (bytes.size() < kMagic.size() || r.raw(kMagic.size()) != kMagic) {
    throw Error(Errc::kBadMagic, "expected \"DCKP\" header");
  }
  const std::uint16_t version = r.u16();
  if (version != kCheckpointVersion) {
    throw Error(Errc::kInvariantViolation, "unsupported .dckpt version " + std::to_string(version));
  }
  const std::uint32_t count = r.u32();
  ParamStore store;
  for (std::uint32_t e = 0; e < count; ++e) {
    const std::uint16_t len = r.u16();
    std::string name = r.raw(len);
    const std::uint8_t rank = r.u8();
    std::vector<std::size_t> shape(rank);
    std::size_t n = 1;
    for (auto& d : shape) {
      d = r.u32();
      n *= d;
    }
    r.need(n * 8);
    std::vector<double> values(n);
    for (double& v : values) v = r.f64();
    store.add_value(name, Tensor(std::move(shape), std::move(values)));
  }
  if (r.remaining() != 0) {
    throw Error(Errc::kTruncated, std::to_string(r.remaining()) + " trailing bytes");
  }
  return store;
}

void save_checkpoint(const std::filesystem::path& path, const ParamStore& store) {
  write_file_atomic(path, encode_checkpoint(store));
}

ParamStore load_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(Errc::kMissingCheckpoint, "no checkpoint at " + path.string());
  }
  return decode_checkpoint(read_file_bytes(path));
}

}  // namespace kpd::diffkit
