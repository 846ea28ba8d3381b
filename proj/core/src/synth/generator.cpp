#include "kpdeform/synth/generator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "kpdeform/core/error.hpp"
#include "kpdeform/core/labeling.hpp"

namespace kpd::synth {
namespace {

constexpr double kPi = std::numbers::pi;

void require(bool ok, const char* key, const char* why) {
  if (!ok) throw Error(Errc::kConfig, std::string(key) + ": " + why);
}

// Surface primitives in the object's local frame (base center at origin).
struct Rect {
  Vec3 origin, u, v;
};
struct CylinderSide {
  double radius, z0, z1;
};
struct Disk {
  double radius, z;
};

struct Primitive {
  enum Kind { kRect, kSide, kDisk } kind;
  Rect rect{};
  CylinderSide side{};
  Disk disk{};
  double area = 0.0;
};

double norm(Vec3 a) { return std::sqrt(a.x * a.x + a.y * a.y + a.z * a.z); }

Primitive rect(Vec3 origin, Vec3 u, Vec3 v) {
  Primitive p{Primitive::kRect};
  p.rect = {origin, u, v};
  p.area = norm(u) * norm(v);
  return p;
}

// Open-bottom box shell spanning [-l/2, l/2] x [-w/2, w/2] x [z0, z1].
void add_box_shell(std::vector<Primitive>& out, double l, double w, double z0, double z1) {
  const double h = z1 - z0;
  const double x0 = -0.5 * l, y0 = -0.5 * w;
  out.push_back(rect({x0, y0, z1}, {l, 0, 0}, {0, w, 0}));            // top
  out.push_back(rect({x0, y0, z0}, {l, 0, 0}, {0, 0, h}));            // -y side
  out.push_back(rect({x0, -y0, z0}, {l, 0, 0}, {0, 0, h}));           // +y side
  out.push_back(rect({x0, y0, z0}, {0, w, 0}, {0, 0, h}));            // -x side
  out.push_back(rect({-x0, y0, z0}, {0, w, 0}, {0, 0, h}));           // +x side
}

void add_cylinder(std::vector<Primitive>& out, double radius, double z0, double z1) {
  Primitive side{Primitive::kSide};
  side.side = {radius, z0, z1};
  side.area = 2.0 * kPi * radius * (z1 - z0);
  out.push_back(side);
  Primitive cap{Primitive::kDisk};
  cap.disk = {radius, z1};
  cap.area = kPi * radius * radius;
  out.push_back(cap);
}

std::vector<Primitive> primitives(Archetype a, Vec3 d) {
  std::vector<Primitive> out;
  const double l = d.x, w = d.y, h = d.z;
  switch (a) {
    case Archetype::kCar:
      add_box_shell(out, l, w, 0.0, h);
      break;
    case Archetype::kPedestrian:
    case Archetype::kPole:
      add_cylinder(out, 0.5 * std::min(l, w), 0.0, h);
      break;
    case Archetype::kCyclist:
      add_box_shell(out, l, 0.5 * w, 0.0, 0.55 * h);  // bicycle
      add_cylinder(out, 0.5 * std::min(l, w), 0.55 * h, h);  // rider
      break;
    case Archetype::kSeated:
      add_box_shell(out, l, w, 0.0, 0.35 * h);  // seat
      add_cylinder(out, 0.425 * std::min(l, w), 0.35 * h, h);
      break;
  }
  return out;
}

Vec3 sample_on(const Primitive& p, Rng& rng) {
  switch (p.kind) {
    case Primitive::kRect: {
      const double s = rng.uniform(), t = rng.uniform();
      return p.rect.origin + s * p.rect.u + t * p.rect.v;
    }
    case Primitive::kSide: {
      const double theta = rng.uniform(-kPi, kPi);
      const double z = rng.uniform(p.side.z0, p.side.z1);
      return {p.side.radius * std::cos(theta), p.side.radius * std::sin(theta), z};
    }
    case Primitive::kDisk: {
      const double r = p.disk.radius * std::sqrt(rng.uniform());
      const double theta = rng.uniform(-kPi, kPi);
      return {r * std::cos(theta), r * std::sin(theta), p.disk.z};
    }
  }
  return {};
}

double truncated_noise(double sigma, Rng& rng) {
  if (sigma <= 0.0) return 0.0;
  const double limit = 3.0 * sigma * (1.0 - 1e-9);
  for (;;) {
    const double n = sigma * rng.normal();
    if (std::abs(n) < limit) return n;
  }
}

double wrap_angle(double a) {
  while (a >= kPi) a -= 2.0 * kPi;
  while (a < -kPi) a += 2.0 * kPi;
  return a;
}

// Separating-axis test for two yaw-rotated rectangles in the ground plane.
bool footprints_overlap(Vec3 ca, double la, double wa, double yaw_a, Vec3 cb, double lb,
                        double wb, double yaw_b) {
  const std::array<double, 2> ua{std::cos(yaw_a), std::sin(yaw_a)};
  const std::array<double, 2> va{-std::sin(yaw_a), std::cos(yaw_a)};
  const std::array<double, 2> ub{std::cos(yaw_b), std::sin(yaw_b)};
  const std::array<double, 2> vb{-std::sin(yaw_b), std::cos(yaw_b)};
  const std::array<double, 2> d{cb.x - ca.x, cb.y - ca.y};
  auto dot = [](const std::array<double, 2>& a, const std::array<double, 2>& b) {
    return a[0] * b[0] + a[1] * b[1];
  };
  for (const auto& axis : {ua, va, ub, vb}) {
    const double ra = 0.5 * la * std::abs(dot(ua, axis)) + 0.5 * wa * std::abs(dot(va, axis));
    const double rb = 0.5 * lb * std::abs(dot(ub, axis)) + 0.5 * wb * std::abs(dot(vb, axis));
    if (std::abs(dot(d, axis)) > ra + rb) return false;
  }
  return true;
}

}  // namespace

void GenConfig::validate() const {
  require(extent > 0.0, "gen.extent", "must be > 0");
  require(range_min >= 0.0, "gen.range_min", "must be >= 0");
  require(range_max > range_min, "gen.range_max", "must exceed gen.range_min");
  require(range_max <= extent, "gen.range_max", "must lie within gen.extent");
  require(fov_deg > 0.0 && fov_deg <= 360.0, "gen.fov_deg", "must be in (0, 360]");
  require(density > 0.0, "gen.density", "must be > 0");
  require(noise_sigma >= 0.0, "gen.noise_sigma", "must be >= 0");
  require(jitter >= 0.0 && jitter < 0.5, "gen.jitter", "must be in [0, 0.5)");
  require(min_gap >= 0.0, "gen.min_gap", "must be >= 0");
  require(max_attempts >= 1, "gen.max_attempts", "must be >= 1");
  require(std::isfinite(ground_z), "gen.ground_z", "must be finite");
}

std::string_view archetype_name(Archetype a) noexcept {
  switch (a) {
    case Archetype::kCar: return "car";
    case Archetype::kPedestrian: return "pedestrian";
    case Archetype::kCyclist: return "cyclist";
    case Archetype::kPole: return "pole";
    case Archetype::kSeated: return "seated";
  }
  return "unknown";
}

bool is_clutter(Archetype a) noexcept { return a == Archetype::kPole || a == Archetype::kSeated; }

ClassId archetype_class(Archetype a) noexcept {
  switch (a) {
    case Archetype::kCar: return ClassId::kCarLike;
    case Archetype::kPedestrian: return ClassId::kPedestrianLike;
    case Archetype::kCyclist: return ClassId::kCyclistLike;
    default: return ClassId::kBackground;
  }
}

Vec3 nominal_dims(Archetype a) noexcept {
  switch (a) {
    case Archetype::kCar: return {4.0, 1.8, 1.5};
    case Archetype::kPedestrian: return {0.6, 0.6, 1.7};
    case Archetype::kCyclist: return {1.8, 0.6, 1.7};
    case Archetype::kPole: return {0.3, 0.3, 2.5};
    case Archetype::kSeated: return {0.7, 0.7, 1.3};
  }
  return {1, 1, 1};
}

double surface_area(Archetype a, Vec3 dims) {
  double area = 0.0;
  for (const auto& p : primitives(a, dims)) area += p.area;
  return area;
}

std::size_t surface_point_count(Archetype a, Vec3 dims, double range, double density) {
  const double r = std::max(range, 1e-3);
  const double falloff = (10.0 / r) * (10.0 / r);
  const double n = std::round(density * surface_area(a, dims) * falloff);
  return std::max<std::size_t>(1, static_cast<std::size_t>(n));
}

std::vector<Vec3> sample_object_points(Archetype a, Vec3 dims, Vec3 base, double yaw,
                                       std::size_t count, double noise_sigma, Rng& rng) {
  const auto prims = primitives(a, dims);
  std::vector<double> cumulative;
  double total = 0.0;
  for (const auto& p : prims) cumulative.push_back(total += p.area);
  const double c = std::cos(yaw), s = std::sin(yaw);
  std::vector<Vec3> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double pick = rng.uniform() * total;
    const std::size_t k = static_cast<std::size_t>(
        std::min<std::ptrdiff_t>(std::upper_bound(cumulative.begin(), cumulative.end(), pick) -
                                     cumulative.begin(),
                                 static_cast<std::ptrdiff_t>(prims.size() - 1)));
    Vec3 local = sample_on(prims[k], rng);
    local.x += truncated_noise(noise_sigma, rng);
    local.y += truncated_noise(noise_sigma, rng);
    local.z += truncated_noise(noise_sigma, rng);
    out.push_back({base.x + c * local.x - s * local.y, base.y + s * local.x + c * local.y,
                   base.z + local.z});
  }
  return out;
}

GeneratedScene generate_scene_detailed(const GenConfig& config, std::uint32_t scene_id) {
  config.validate();
  Rng rng(mix_seed(config.seed, scene_id));
  GeneratedScene out;
  out.scene.scene_id = scene_id;
  const double half_fov = 0.5 * config.fov_deg * kPi / 180.0;
  const double inflate = 6.0 * config.noise_sigma;

  std::vector<Archetype> plan;
  plan.insert(plan.end(), config.n_car, Archetype::kCar);
  plan.insert(plan.end(), config.n_pedestrian, Archetype::kPedestrian);
  plan.insert(plan.end(), config.n_cyclist, Archetype::kCyclist);
  plan.insert(plan.end(), config.n_pole, Archetype::kPole);
  plan.insert(plan.end(), config.n_seated, Archetype::kSeated);

  for (Archetype kind : plan) {
    const Vec3 nominal = nominal_dims(kind);
    bool placed = false;
    for (std::size_t attempt = 0; attempt < config.max_attempts && !placed; ++attempt) {
      const Vec3 dims{nominal.x * rng.uniform(1.0 - config.jitter, 1.0 + config.jitter),
                      nominal.y * rng.uniform(1.0 - config.jitter, 1.0 + config.jitter),
                      nominal.z * rng.uniform(1.0 - config.jitter, 1.0 + config.jitter)};
      const double range = rng.uniform(config.range_min, config.range_max);
      const double azimuth = rng.uniform(-half_fov, half_fov);
      const double yaw = wrap_angle(rng.uniform(-kPi, kPi));
      const Vec3 base{range * std::cos(azimuth), range * std::sin(azimuth), config.ground_z};
      const double fl = dims.x + inflate + config.min_gap;
      const double fw = dims.y + inflate + config.min_gap;
      bool clash = false;
      for (const auto& other : out.objects) {
        if (footprints_overlap(base, fl, fw, yaw, other.center, other.box.size.x + config.min_gap,
                               other.box.size.y + config.min_gap, other.yaw)) {
          clash = true;
          break;
        }
      }
      if (clash) continue;
      PlacedObject obj;
      obj.kind = kind;
      obj.dims = dims;
      obj.center = {base.x, base.y, base.z + 0.5 * dims.z};
      obj.yaw = yaw;
      obj.range = std::hypot(base.x, base.y);
      obj.box = {archetype_class(kind), obj.center,
                 {dims.x + inflate, dims.y + inflate, dims.z + inflate}, yaw};
      obj.point_begin = out.scene.cloud.size();
      const std::size_t count = surface_point_count(kind, dims, obj.range, config.density);
      for (const Vec3& p : sample_object_points(kind, dims, base, yaw, count, config.noise_sigma, rng)) {
        out.scene.cloud.push_back({p.x, p.y, p.z, rng.uniform()});
      }
      obj.point_end = out.scene.cloud.size();
      out.objects.push_back(obj);
      if (!is_clutter(kind)) out.scene.labels.push_back(obj.box);
      placed = true;
    }
    if (!placed) {
      throw Error(Errc::kPlacementFailure,
                  "could not place " + std::string(archetype_name(kind)) + " without overlap after " +
                      std::to_string(config.max_attempts) + " attempts (scene " +
                      std::to_string(scene_id) + ")");
    }
  }

  const double r0 = config.range_min * config.range_min;
  const double r1 = config.range_max * config.range_max;
  for (std::size_t g = 0; g < config.n_ground; ++g) {
    bool ok = false;
    for (std::size_t attempt = 0; attempt < config.max_attempts && !ok; ++attempt) {
      const double r = std::sqrt(rng.uniform(r0, r1));
      const double az = rng.uniform(-half_fov, half_fov);
      const Vec3 p{r * std::cos(az), r * std::sin(az),
                   config.ground_z + truncated_noise(config.noise_sigma, rng)};
      const double intensity = rng.uniform();
      ok = std::none_of(out.objects.begin(), out.objects.end(),
                        [&](const PlacedObject& o) { return inside_box(p, o.box); });
      if (ok) out.scene.cloud.push_back({p.x, p.y, p.z, intensity});
    }
    if (!ok) throw Error(Errc::kPlacementFailure, "could not place ground point");
  }
  return out;
}

Scene generate_scene(const GenConfig& config, std::uint32_t scene_id) {
  return generate_scene_detailed(config, scene_id).scene;
}

}  // namespace kpd::synth
