#include "kpdeform/spatial/queries.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "kpdeform/core/error.hpp"
#include "kpdeform/core/rng.hpp"

namespace kpd::spatial {
namespace {

using Candidate = std::pair<double, std::size_t>;  // (squared distance, index)

void visit_cell(const GridIndex& index, const CellKey& key, Vec3 q, std::size_t k,
                std::vector<Candidate>& heap) {
  for (std::size_t i : index.cell(key)) {
    const Candidate c{squared_distance(index.point(i), q), i};
    if (heap.size() < k) {
      heap.push_back(c);
      std::push_heap(heap.begin(), heap.end());
    } else if (c < heap.front()) {
      std::pop_heap(heap.begin(), heap.end());
      heap.back() = c;
      std::push_heap(heap.begin(), heap.end());
    }
  }
}

// Visits every occupied cell at Chebyshev distance exactly r from `center`,
// clipped to the grid's occupied bounds. Returns false once the ring lies
// entirely outside those bounds.
bool visit_ring(const GridIndex& index, const CellKey& center, std::int64_t r, Vec3 q,
                std::size_t k, std::vector<Candidate>& heap) {
  const CellKey lo = index.min_cell();
  const CellKey hi = index.max_cell();
  if (center.x - r < lo.x && center.x + r > hi.x && center.y - r < lo.y &&
      center.y + r > hi.y && center.z - r < lo.z && center.z + r > hi.z) {
    return false;
  }
  const std::int64_t x0 = std::max(center.x - r, lo.x), x1 = std::min(center.x + r, hi.x);
  const std::int64_t y0 = std::max(center.y - r, lo.y), y1 = std::min(center.y + r, hi.y);
  const std::int64_t z0 = std::max(center.z - r, lo.z), z1 = std::min(center.z + r, hi.z);
  for (std::int64_t x = x0; x <= x1; ++x) {
    for (std::int64_t y = y0; y <= y1; ++y) {
      const bool on_shell = std::abs(x - center.x) == r || std::abs(y - center.y) == r;
      if (on_shell) {
        for (std::int64_t z = z0; z <= z1; ++z) visit_cell(index, {x, y, z}, q, k, heap);
      } else {
        if (center.z - r >= lo.z && center.z - r <= hi.z)
          visit_cell(index, {x, y, center.z - r}, q, k, heap);
        if (r > 0 && center.z + r >= lo.z && center.z + r <= hi.z)
          visit_cell(index, {x, y, center.z + r}, q, k, heap);
      }
    }
  }
  return true;
}

}  // namespace

NeighborSet knn_query(const GridIndex& index, std::span<const Vec3> queries, std::size_t k) {
  if (k > index.size()) {
    throw Error(Errc::kKTooLarge, "k=" + std::to_string(k) + " exceeds source size " +
                                      std::to_string(index.size()));
  }
  NeighborSet out;
  out.kind = QueryKind::kKnn;
  out.k = k;
  std::vector<Candidate> heap;
  std::vector<std::size_t> row;
  const double cs = index.cell_size();
  for (const Vec3& q : queries) {
    heap.clear();
    if (k > 0) {
      const CellKey center = index.cell_of(q);
      for (std::int64_t r = 0;; ++r) {
        if (!visit_ring(index, center, r, q, k, heap)) break;
        // Unvisited points lie at least r * cell_size away; the margin absorbs
        // rounding in the floor() cell assignment.
        const double bound = static_cast<double>(r) * cs * (1.0 - 1e-9);
        if (heap.size() == k && heap.front().first < bound * bound) break;
      }
    }
    std::sort_heap(heap.begin(), heap.end());
    row.clear();
    for (const auto& c : heap) row.push_back(c.second);
    out.lists.push_row(row);
  }
  return out;
}

NeighborSet radius_group(const GridIndex& index, std::span<const Vec3> centers, double radius,
                         std::size_t max_samples, std::uint64_t seed) {
  if (!(radius > 0.0)) throw Error(Errc::kInvariantViolation, "radius must be positive");
  if (max_samples < 1) throw Error(Errc::kInvariantViolation, "max_samples must be >= 1");
  NeighborSet out;
  out.kind = QueryKind::kRadius;
  out.radius = radius;
  out.max_samples = max_samples;
  const double r2 = radius * radius;
  std::vector<std::size_t> row;
  for (std::size_t qi = 0; qi < centers.size(); ++qi) {
    const Vec3 q = centers[qi];
    row.clear();
    const CellKey lo = index.cell_of({q.x - radius, q.y - radius, q.z - radius});
    const CellKey hi = index.cell_of({q.x + radius, q.y + radius, q.z + radius});
    for (std::int64_t x = lo.x; x <= hi.x; ++x)
      for (std::int64_t y = lo.y; y <= hi.y; ++y)
        for (std::int64_t z = lo.z; z <= hi.z; ++z)
          for (std::size_t i : index.cell({x, y, z}))
            if (squared_distance(index.point(i), q) <= r2) row.push_back(i);
    std::sort(row.begin(), row.end());
    if (row.size() > max_samples) {
      Rng rng(mix_seed(seed, qi));
      for (std::size_t i = 0; i < max_samples; ++i) {
        const std::size_t j = i + rng.index(row.size() - i);
        std::swap(row[i], row[j]);
      }
      row.resize(max_samples);
      std::sort(row.begin(), row.end());
    }
    out.lists.push_row(row);
  }
  return out;
}

NeighborSet knn_excluding_self(std::span<const Vec3> points, std::size_t k) {
  if (k + 1 > points.size()) {
    throw Error(Errc::kKTooLarge, "need more than k=" + std::to_string(k) + " points, have " +
                                      std::to_string(points.size()));
  }
  const GridIndex index = GridIndex::for_knn(points);
  const NeighborSet full = knn_query(index, points, k + 1);
  NeighborSet out;
  out.kind = QueryKind::kKnn;
  out.k = k;
  std::vector<std::size_t> row;
  for (std::size_t i = 0; i < full.size(); ++i) {
    row.clear();
    for (std::size_t j : full[i])
      if (j != i) row.push_back(j);
    row.resize(k);  // drops the farthest when i itself was crowded out by duplicates
    out.lists.push_row(row);
  }
  return out;
}

}  // namespace kpd::spatial
