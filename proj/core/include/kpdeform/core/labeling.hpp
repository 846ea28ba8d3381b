#pragma once

#include <span>
#include <vector>

#include "kpdeform/core/types.hpp"

namespace kpd {

// Open-interior membership in the yaw-rotated box; points on a face are outside.
bool inside_box(Vec3 p, const ObjectLabel& box);

// Class of the box strictly containing each position, Background otherwise.
// Boxes are assumed to have disjoint interiors; the first match wins.
std::vector<ClassId> label_keypoints(std::span<const Vec3> positions,
                                     std::span<const ObjectLabel> labels);

}  // namespace kpd
