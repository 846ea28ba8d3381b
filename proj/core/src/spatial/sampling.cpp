#include "kpdeform/spatial/sampling.hpp"

#include <limits>
#include <numeric>
#include <string>

#include "kpdeform/core/error.hpp"
#include "kpdeform/core/rng.hpp"

namespace kpd::spatial {

std::string_view sampler_name(SamplerKind kind) noexcept {
  return kind == SamplerKind::kFarthestPoint ? "fps" : "random";
}

std::optional<SamplerKind> parse_sampler(std::string_view name) noexcept {
  if (name == "fps") return SamplerKind::kFarthestPoint;
  if (name == "random") return SamplerKind::kUniformRandom;
  return std::nullopt;
}

namespace {
void check_k(std::size_t n, std::size_t k) {
  if (k > n) {
    throw Error(Errc::kKTooLarge,
                "requested " + std::to_string(k) + " samples from " + std::to_string(n) + " points");
  }
}
}  // namespace

std::vector<std::size_t> farthest_point_sampling_from(std::span<const Vec3> points,
                                                      std::size_t k, std::size_t first) {
  check_k(points.size(), k);
  std::vector<std::size_t> picked;
  if (k == 0) return picked;
  picked.reserve(k);
  std::vector<double> min_d2(points.size(), std::numeric_limits<double>::infinity());
  std::size_t current = first;
  for (std::size_t step = 0; step < k; ++step) {
    picked.push_back(current);
    min_d2[current] = -1.0;  // selected
    const Vec3 c = points[current];
    std::size_t best = 0;
    double best_d2 = -1.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (min_d2[i] < 0.0) continue;
      const double d2 = squared_distance(points[i], c);
      if (d2 < min_d2[i]) min_d2[i] = d2;
      if (min_d2[i] > best_d2) {  // strict: lowest index wins ties
        best_d2 = min_d2[i];
        best = i;
      }
    }
    current = best;
  }
  return picked;
}

std::vector<std::size_t> farthest_point_sampling(std::span<const Vec3> points, std::size_t k,
                                                 std::uint64_t seed) {
  check_k(points.size(), k);
  if (k == 0) return {};
  Rng rng(mix_seed(seed, 0x465053));
  return farthest_point_sampling_from(points, k, rng.index(points.size()));
}

std::vector<std::size_t> random_sampling(std::size_t n, std::size_t k, std::uint64_t seed) {
  check_k(n, k);
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  Rng rng(mix_seed(seed, 0x524e44));
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.index(n - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

std::vector<std::size_t> sample_keypoints(SamplerKind kind, std::span<const Vec3> points,
                                          std::size_t k, std::uint64_t seed) {
  if (kind == SamplerKind::kFarthestPoint) return farthest_point_sampling(points, k, seed);
  return random_sampling(points.size(), k, seed);
}

}  // namespace kpd::spatial
