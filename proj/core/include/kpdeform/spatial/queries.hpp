#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "kpdeform/core/ragged.hpp"
#include "kpdeform/core/vec3.hpp"
#include "kpdeform/spatial/grid_index.hpp"

namespace kpd::spatial {

enum class QueryKind { kKnn, kRadius };

// Per-query neighbor lists into the source cloud of a GridIndex.
// kNN lists are sorted by ascending distance (ties: lower index first);
// radius lists are sorted by ascending index.
struct NeighborSet {
  QueryKind kind = QueryKind::kKnn;
  std::size_t k = 0;
  double radius = 0.0;
  std::size_t max_samples = 0;
  Ragged lists;

  std::size_t size() const { return lists.size(); }
  std::span<const std::size_t> operator[](std::size_t q) const { return lists[q]; }
};

NeighborSet knn_query(const GridIndex& index, std::span<const Vec3> queries, std::size_t k);

// All source points within `radius` (inclusive) of each center. Groups larger
// than max_samples are reduced to a uniform subsample of exactly max_samples,
// drawn from a stream derived from (seed, query index).
NeighborSet radius_group(const GridIndex& index, std::span<const Vec3> centers, double radius,
                         std::size_t max_samples, std::uint64_t seed);

// kNN among a point set excluding each point itself; every row has k entries.
NeighborSet knn_excluding_self(std::span<const Vec3> points, std::size_t k);

}  // namespace kpd::spatial
