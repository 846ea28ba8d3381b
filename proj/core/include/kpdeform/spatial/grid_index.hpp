#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "kpdeform/core/vec3.hpp"

namespace kpd::spatial {

struct CellKey {
  std::int64_t x = 0;
  std::int64_t y = 0;
  std::int64_t z = 0;
  friend bool operator==(const CellKey&, const CellKey&) = default;
};

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 73856093ULL;
    h ^= static_cast<std::uint64_t>(k.y) * 19349663ULL;
    h ^= static_cast<std::uint64_t>(k.z) * 83492791ULL;
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

// Uniform grid hash over a fixed point set. Each point lives in exactly one
// cell, floor(coordinate / cell_size) per axis. Immutable once built, so
// concurrent queries are safe.
class GridIndex {
 public:
  GridIndex(std::span<const Vec3> points, double cell_size);

  // cell_size = (largest bounding-box extent) / cbrt(n), floored at a tiny
  // positive value for degenerate clouds.
  static GridIndex for_knn(std::span<const Vec3> points);

  double cell_size() const { return cell_size_; }
  std::size_t size() const { return points_.size(); }
  std::span<const Vec3> points() const { return points_; }
  const Vec3& point(std::size_t i) const { return points_[i]; }

  CellKey cell_of(Vec3 p) const;

  // Indices stored in a cell, ascending; empty span for unoccupied cells.
  std::span<const std::size_t> cell(const CellKey& key) const;

  std::size_t occupied_cells() const { return cells_.size(); }
  CellKey min_cell() const { return min_cell_; }
  CellKey max_cell() const { return max_cell_; }

 private:
  struct Range {
    std::size_t begin = 0;
    std::size_t end = 0;
  };

  std::vector<Vec3> points_;
  double cell_size_;
  std::vector<std::size_t> order_;
  std::unordered_map<CellKey, Range, CellKeyHash> cells_;
  CellKey min_cell_;
  CellKey max_cell_;
};

}  // namespace kpd::spatial
