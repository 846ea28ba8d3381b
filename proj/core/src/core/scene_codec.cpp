#include "kpdeform/core/scene_codec.hpp"

#include <limits>

#include "kpdeform/core/bytes.hpp"
#include "kpdeform/core/error.hpp"

namespace kpd {
namespace {
constexpr std::string_view kMagic = "DFRM";
}  // namespace

std::vector<std::uint8_t> encode_scene(const Scene& scene) {
  validate_scene(scene);
  if (scene.cloud.size() > std::numeric_limits<std::uint32_t>::max() ||
      scene.labels.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw Error(Errc::kInvariantViolation, "scene too large for the .dscene format");
  }
  ByteWriter w;
  w.raw(kMagic);
  w.u16(kSceneFormatVersion);
  w.u32(scene.scene_id);
  w.u32(static_cast<std::uint32_t>(scene.cloud.size()));
  w.u16(static_cast<std::uint16_t>(scene.labels.size()));
  for (const auto& p : scene.cloud) {
    w.f64(p.x);
    w.f64(p.y);
    w.f64(p.z);
    w.f64(p.intensity);
  }
  for (const auto& l : scene.labels) {
    w.u8(static_cast<std::uint8_t>(l.class_id));
    w.f64(l.center.x);
    w.f64(l.center.y);
    w.f64(l.center.z);
    w.f64(l.size.x);
    w.f64(l.size.y);
    w.f64(l.size.z);
    w.f64(l.yaw);
  }
  return std::move(w).take();
}

Scene decode_scene(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (bytes.size() < kMagic.size() || r.raw(kMagic.size()) != kMagic) {
    throw Error(Errc::kBadMagic, "expected \"DFRM\" header");
  }
  r.need(kSceneHeaderBytes - kMagic.size());
  const std::uint16_t version = r.u16();
  if (version != kSceneFormatVersion) {
    throw Error(Errc::kInvariantViolation, "unsupported .dscene version " + std::to_string(version));
  }
  Scene scene;
  scene.scene_id = r.u32();
  const std::uint32_t n_points = r.u32();
  const std::uint16_t n_labels = r.u16();
  const std::size_t expected = static_cast<std::size_t>(n_points) * kScenePointBytes +
                               static_cast<std::size_t>(n_labels) * kSceneLabelBytes;
  if (r.remaining() != expected) {
    throw Error(Errc::kTruncated, "payload is " + std::to_string(r.remaining()) +
                                      " bytes, header implies " + std::to_string(expected));
  }
  scene.cloud.resize(n_points);
  for (auto& p : scene.cloud) {
    p.x = r.f64();
    p.y = r.f64();
    p.z = r.f64();
    p.intensity = r.f64();
  }
  scene.labels.resize(n_labels);
  for (auto& l : scene.labels) {
    const std::uint8_t cls = r.u8();
    if (cls >= kNumObjectClasses) {
      throw Error(Errc::kInvariantViolation, "label class byte " + std::to_string(cls));
    }
    l.class_id = static_cast<ClassId>(cls);
    l.center = {r.f64(), r.f64(), r.f64()};
    l.size = {r.f64(), r.f64(), r.f64()};
    l.yaw = r.f64();
  }
  validate_scene(scene);
  return scene;
}

Scene read_scene_file(const std::filesystem::path& path) {
  try {
    return decode_scene(read_file_bytes(path));
  } catch (const Error& e) {
    if (e.code() == Errc::kIo) throw;
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void write_scene_file(const std::filesystem::path& path, const Scene& scene) {
  write_file_atomic(path, encode_scene(scene));
}

}  // namespace kpd
