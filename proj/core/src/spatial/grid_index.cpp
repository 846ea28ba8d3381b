#include "kpdeform/spatial/grid_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "kpdeform/core/error.hpp"

namespace kpd::spatial {

GridIndex::GridIndex(std::span<const Vec3> points, double cell_size)
    : points_(points.begin(), points.end()), cell_size_(cell_size) {
  if (!(cell_size > 0.0) || !std::isfinite(cell_size)) {
    throw Error(Errc::kInvariantViolation, "grid cell size must be positive and finite");
  }
  std::vector<CellKey> keys(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!is_finite(points_[i])) throw Error(Errc::kNonFinite, "grid point is not finite");
    keys[i] = cell_of(points_[i]);
  }
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
    const auto& ka = keys[a];
    const auto& kb = keys[b];
    if (ka.x != kb.x) return ka.x < kb.x;
    if (ka.y != kb.y) return ka.y < kb.y;
    return ka.z < kb.z;
  });
  constexpr auto lo = std::numeric_limits<std::int64_t>::min();
  constexpr auto hi = std::numeric_limits<std::int64_t>::max();
  min_cell_ = {hi, hi, hi};
  max_cell_ = {lo, lo, lo};
  std::size_t begin = 0;
  while (begin < order_.size()) {
    const CellKey key = keys[order_[begin]];
    std::size_t end = begin + 1;
    while (end < order_.size() && keys[order_[end]] == key) ++end;
    cells_.emplace(key, Range{begin, end});
    min_cell_ = {std::min(min_cell_.x, key.x), std::min(min_cell_.y, key.y),
                 std::min(min_cell_.z, key.z)};
    max_cell_ = {std::max(max_cell_.x, key.x), std::max(max_cell_.y, key.y),
                 std::max(max_cell_.z, key.z)};
    begin = end;
  }
}

GridIndex GridIndex::for_knn(std::span<const Vec3> points) {
  double extent = 0.0;
  if (!points.empty()) {
    Vec3 lo = points[0];
    Vec3 hi = points[0];
    for (const auto& p : points) {
      for (int a = 0; a < 3; ++a) {
        lo[a] = std::min(lo[a], p[a]);
        hi[a] = std::max(hi[a], p[a]);
      }
    }
    extent = std::max({hi.x - lo.x, hi.y - lo.y, hi.z - lo.z});
  }
  const double n = static_cast<double>(std::max<std::size_t>(points.size(), 1));
  double cell = extent / std::cbrt(n);
  if (!(cell > 1e-9)) cell = 1.0;
  return GridIndex(points, cell);
}

CellKey GridIndex::cell_of(Vec3 p) const {
  return {static_cast<std::int64_t>(std::floor(p.x / cell_size_)),
          static_cast<std::int64_t>(std::floor(p.y / cell_size_)),
          static_cast<std::int64_t>(std::floor(p.z / cell_size_))};
}

std::span<const std::size_t> GridIndex::cell(const CellKey& key) const {
  auto it = cells_.find(key);
  if (it == cells_.end()) return {};
  return {order_.data() + it->second.begin, it->second.end - it->second.begin};
}

}  // namespace kpd::spatial
