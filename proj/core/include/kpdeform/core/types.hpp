#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "kpdeform/core/vec3.hpp"

namespace kpd {

// Sensor frame: right-handed, x forward, y left, z up, meters.

struct Point {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double intensity = 0.0;

  Vec3 position() const { return {x, y, z}; }
  friend bool operator==(const Point&, const Point&) = default;
};

using PointCloud = std::vector<Point>;

enum class ClassId : std::uint8_t {
  kCarLike = 0,
  kPedestrianLike = 1,
  kCyclistLike = 2,
  kBackground = 3,
};

inline constexpr int kNumObjectClasses = 3;
inline constexpr int kNumClasses = 4;

std::string_view class_name(ClassId c) noexcept;
std::optional<ClassId> parse_class_name(std::string_view name) noexcept;

struct ObjectLabel {
  ClassId class_id = ClassId::kCarLike;
  Vec3 center;
  Vec3 size;  // length (x), width (y), height (z) in the box frame
  double yaw = 0.0;

  friend bool operator==(const ObjectLabel&, const ObjectLabel&) = default;
};

struct Scene {
  PointCloud cloud;
  std::vector<ObjectLabel> labels;
  std::uint32_t scene_id = 0;

  friend bool operator==(const Scene&, const Scene&) = default;
};

struct Keypoint {
  Vec3 position;
  std::vector<double> feature;
};

// Throws Error(kInvariantViolation) naming the first bad field.
void validate_point(const Point& p);
void validate_label(const ObjectLabel& label);
void validate_scene(const Scene& scene);

std::vector<Vec3> positions_of(const PointCloud& cloud);

}  // namespace kpd
