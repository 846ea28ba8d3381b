#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <system_error>

#include "kpdeform/core/bytes.hpp"
#include "kpdeform/core/error.hpp"
#include "kpdeform/core/types.hpp"

namespace kpd {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::kBadMagic: return "BadMagic";
    case Errc::kTruncated: return "Truncated";
    case Errc::kInvariantViolation: return "InvariantViolation";
    case Errc::kKTooLarge: return "KTooLarge";
    case Errc::kShapeMismatch: return "ShapeMismatch";
    case Errc::kNonFinite: return "NonFinite";
    case Errc::kEmptyGroup: return "EmptyGroup";
    case Errc::kKinkProximity: return "KinkProximity";
    case Errc::kTooFewKeypoints: return "TooFewKeypoints";
    case Errc::kPlacementFailure: return "PlacementFailure";
    case Errc::kNoPositives: return "NoPositives";
    case Errc::kMissingCheckpoint: return "MissingCheckpoint";
    case Errc::kIo: return "IoError";
    case Errc::kConfig: return "ConfigError";
  }
  return "Unknown";
}

std::string_view class_name(ClassId c) noexcept {
  switch (c) {
    case ClassId::kCarLike: return "CarLike";
    case ClassId::kPedestrianLike: return "PedestrianLike";
    case ClassId::kCyclistLike: return "CyclistLike";
    case ClassId::kBackground: return "Background";
  }
  return "Unknown";
}

std::optional<ClassId> parse_class_name(std::string_view name) noexcept {
  for (int c = 0; c < kNumClasses; ++c) {
    if (class_name(static_cast<ClassId>(c)) == name) return static_cast<ClassId>(c);
  }
  return std::nullopt;
}

void validate_point(const Point& p) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
    throw Error(Errc::kInvariantViolation, "point coordinate is not finite");
  }
  if (!(p.intensity >= 0.0 && p.intensity <= 1.0)) {
    throw Error(Errc::kInvariantViolation, "point intensity outside [0,1]");
  }
}

void validate_label(const ObjectLabel& label) {
  if (static_cast<int>(label.class_id) >= kNumObjectClasses) {
    throw Error(Errc::kInvariantViolation, "label class is not an object class");
  }
  if (!is_finite(label.center)) {
    throw Error(Errc::kInvariantViolation, "label center is not finite");
  }
  if (!(label.size.x > 0.0 && label.size.y > 0.0 && label.size.z > 0.0) ||
      !is_finite(label.size)) {
    throw Error(Errc::kInvariantViolation, "label size must be strictly positive");
  }
  if (!(label.yaw >= -std::numbers::pi && label.yaw < std::numbers::pi)) {
    throw Error(Errc::kInvariantViolation, "label yaw outside [-pi, pi)");
  }
}

void validate_scene(const Scene& scene) {
  for (const auto& p : scene.cloud) validate_point(p);
  for (const auto& l : scene.labels) validate_label(l);
}

std::vector<Vec3> positions_of(const PointCloud& cloud) {
  std::vector<Vec3> out;
  out.reserve(cloud.size());
  for (const auto& p : cloud) out.push_back(p.position());
  return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw Error(Errc::kIo, "cannot create directory " + path.parent_path().string());
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::kIo, "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(Errc::kIo, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(Errc::kIo, "cannot rename " + tmp.string() + " to " + path.string());
}

void write_text_atomic(const std::filesystem::path& path, std::string_view text) {
  write_file_atomic(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

}  // namespace kpd
