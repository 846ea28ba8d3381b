#include "kpdeform/core/labeling.hpp"

#include <cmath>

namespace kpd {

bool inside_box(Vec3 p, const ObjectLabel& box) {
  const double dx = p.x - box.center.x;
  const double dy = p.y - box.center.y;
  const double dz = p.z - box.center.z;
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  // Rotate into the box frame by -yaw.
  const double lx = c * dx + s * dy;
  const double ly = -s * dx + c * dy;
  return std::abs(lx) < 0.5 * box.size.x && std::abs(ly) < 0.5 * box.size.y &&
         std::abs(dz) < 0.5 * box.size.z;
}

std::vector<ClassId> label_keypoints(std::span<const Vec3> positions,
                                     std::span<const ObjectLabel> labels) {
  std::vector<ClassId> out(positions.size(), ClassId::kBackground);
  for (std::size_t i = 0; i < positions.size(); ++i) {
    for (const auto& box : labels) {
      if (inside_box(positions[i], box)) {
        out[i] = box.class_id;
        break;
      }
    }
  }
  return out;
}

}  // namespace kpd
