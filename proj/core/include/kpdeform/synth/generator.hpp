#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "kpdeform/core/rng.hpp"
#include "kpdeform/core/types.hpp"

namespace kpd::synth {

struct GenConfig {
  double extent = 60.0;     // scene bounds: |x|, |y| <= extent
  double range_min = 5.0;   // object/ground placement range, meters from origin
  double range_max = 50.0;
  double fov_deg = 90.0;    // azimuth window centered on +x
  std::size_t n_car = 3;
  std::size_t n_pedestrian = 8;
  std::size_t n_cyclist = 6;
  std::size_t n_pole = 6;     // clutter, confusable with pedestrians
  std::size_t n_seated = 5;   // clutter, confusable with cyclists
  double density = 60.0;      // surface points per m^2 for an object at 10 m
  std::size_t n_ground = 2000;
  double ground_z = -1.7;
  double noise_sigma = 0.02;
  double jitter = 0.1;        // relative, per dimension
  double min_gap = 0.5;       // meters between inflated footprints
  std::size_t max_attempts = 2000;
  std::uint64_t seed = 7;

  // Throws Error(kConfig) naming the offending key.
  void validate() const;
};

enum class Archetype { kCar, kPedestrian, kCyclist, kPole, kSeated };

std::string_view archetype_name(Archetype a) noexcept;
bool is_clutter(Archetype a) noexcept;
ClassId archetype_class(Archetype a) noexcept;  // Background for clutter
Vec3 nominal_dims(Archetype a) noexcept;        // length, width, height

struct PlacedObject {
  Archetype kind = Archetype::kCar;
  Vec3 dims;     // jittered geometry extents
  Vec3 center;   // geometry center
  double yaw = 0.0;
  double range = 0.0;  // horizontal distance of the center from the sensor
  ObjectLabel box;     // geometry inflated by 3 sigma per side
  std::size_t point_begin = 0;
  std::size_t point_end = 0;
};

struct GeneratedScene {
  Scene scene;
  std::vector<PlacedObject> objects;  // labeled objects and clutter, in placement order
};

GeneratedScene generate_scene_detailed(const GenConfig& config, std::uint32_t scene_id);
Scene generate_scene(const GenConfig& config, std::uint32_t scene_id);

double surface_area(Archetype a, Vec3 dims);

// round(density * area * (10 / range)^2), at least 1.
std::size_t surface_point_count(Archetype a, Vec3 dims, double range, double density);

// Samples surface points of one object in its local frame (base at z = 0,
// centered in x/y), adds truncated Gaussian noise |n| < 3 sigma per axis,
// then rotates by yaw and translates so the base center sits at `base`.
std::vector<Vec3> sample_object_points(Archetype a, Vec3 dims, Vec3 base, double yaw,
                                       std::size_t count, double noise_sigma, Rng& rng);

}  // namespace kpd::synth
