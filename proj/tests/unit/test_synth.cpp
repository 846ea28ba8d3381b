#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "kpdeform/core/bytes.hpp"
#include "kpdeform/core/error.hpp"
#include "kpdeform/core/labeling.hpp"
#include "kpdeform/core/scene_codec.hpp"
#include "kpdeform/synth/dataset.hpp"
#include "kpdeform/synth/generator.hpp"

namespace kpd::synth {
namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  return d;
}

TEST(Generator, Deterministic) {
  GenConfig c;
  EXPECT_EQ(generate_scene(c, 4), generate_scene(c, 4));
  EXPECT_NE(generate_scene(c, 4), generate_scene(c, 5));
}

TEST(Generator, EmptyConfigIsGroundOnly) {
  GenConfig c;
  c.n_car = c.n_pedestrian = c.n_cyclist = c.n_pole = c.n_seated = 0;
  const Scene s = generate_scene(c, 0);
  EXPECT_TRUE(s.labels.empty());
  EXPECT_EQ(s.cloud.size(), c.n_ground);
  for (const auto& p : s.cloud) EXPECT_NEAR(p.z, c.ground_z, 3 * c.noise_sigma);
}

TEST(Generator, ClutterIsUnlabeledBackground) {
  GenConfig c;
  const auto g = generate_scene_detailed(c, 2);
  EXPECT_EQ(g.scene.labels.size(), c.n_car + c.n_pedestrian + c.n_cyclist);
  std::size_t clutter = 0;
  for (const auto& o : g.objects) {
    if (!is_clutter(o.kind)) continue;
    ++clutter;
    std::vector<Vec3> pts;
    for (std::size_t i = o.point_begin; i < o.point_end; ++i) pts.push_back(g.scene.cloud[i].position());
    for (ClassId cls : label_keypoints(pts, g.scene.labels)) EXPECT_EQ(cls, ClassId::kBackground);
  }
  EXPECT_EQ(clutter, c.n_pole + c.n_seated);
}

TEST(Generator, ObjectPointsLieInTheirLabelBox) {
  GenConfig c;
  const auto g = generate_scene_detailed(c, 6);
  for (const auto& o : g.objects) {
    if (is_clutter(o.kind)) continue;
    for (std::size_t i = o.point_begin; i < o.point_end; ++i) {
      ASSERT_TRUE(inside_box(g.scene.cloud[i].position(), o.box)) << archetype_name(o.kind);
    }
    EXPECT_EQ(o.box.class_id, archetype_class(o.kind));
  }
}

TEST(Generator, PlacementWithinRangeAndFov) {
  GenConfig c;
  const auto g = generate_scene_detailed(c, 9);
  const double half_fov = c.fov_deg * std::acos(-1.0) / 360.0;
  for (const auto& o : g.objects) {
    EXPECT_GE(o.range, c.range_min);
    EXPECT_LE(o.range, c.range_max);
    EXPECT_LE(std::abs(std::atan2(o.center.y, o.center.x)), half_fov + 1e-12);
  }
}

TEST(Generator, PointCountsFollowInverseSquareRange) {
  GenConfig c;
  for (std::uint32_t id = 0; id < 5; ++id) {
    const auto g = generate_scene_detailed(c, id);
    for (const auto& o : g.objects) {
      EXPECT_EQ(o.point_end - o.point_begin,
                surface_point_count(o.kind, o.dims, o.range, c.density));
    }
  }
}

TEST(Generator, PedestrianDensityRatioTenVersusThirty) {
  // Same jittered pedestrian placed at 10 m and 30 m; nominal ratio 9.
  GenConfig c;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const Vec3 n = nominal_dims(Archetype::kPedestrian);
    const Vec3 dims{n.x * rng.uniform(0.9, 1.1), n.y * rng.uniform(0.9, 1.1),
                    n.z * rng.uniform(0.9, 1.1)};
    const auto near = sample_object_points(Archetype::kPedestrian, dims, {10, 0, c.ground_z}, 0.0,
                                           surface_point_count(Archetype::kPedestrian, dims, 10.0, c.density),
                                           c.noise_sigma, rng);
    const auto far = sample_object_points(Archetype::kPedestrian, dims, {30, 0, c.ground_z}, 0.0,
                                          surface_point_count(Archetype::kPedestrian, dims, 30.0, c.density),
                                          c.noise_sigma, rng);
    const double ratio = static_cast<double>(near.size()) / static_cast<double>(far.size());
    EXPECT_GE(ratio, 7.0) << seed;
    EXPECT_LE(ratio, 11.0) << seed;
  }
}

TEST(Generator, NoiseIsTruncated) {
  Rng rng(1);
  const Vec3 dims = nominal_dims(Archetype::kPole);
  const double sigma = 0.05;
  const auto pts = sample_object_points(Archetype::kPole, dims, {}, 0.0, 2000, sigma, rng);
  for (const auto& p : pts) {
    EXPECT_LT(std::hypot(p.x, p.y), dims.x / 2 + 3 * sigma * std::sqrt(2.0));
    EXPECT_GT(p.z, -3 * sigma);
    EXPECT_LT(p.z, dims.z + 3 * sigma);
  }
}

TEST(Generator, PlacementFailure) {
  GenConfig c;
  c.extent = 6.0;
  c.range_min = 1.0;
  c.range_max = 5.0;
  c.n_car = 40;
  c.max_attempts = 50;
  try {
    generate_scene(c, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kPlacementFailure);
  }
}

TEST(Generator, ConfigValidationNamesKey) {
  GenConfig c;
  c.range_max = 1.0;
  try {
    c.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("gen.range_max"), std::string::npos);
  }
}

TEST(Dataset, FilesManifestAndDeterminism) {
  GenConfig c;
  c.n_ground = 300;
  const auto a = fresh_dir("kpdeform_ds_a");
  const auto b = fresh_dir("kpdeform_ds_b");
  const auto rows = generate_dataset(c, 5, 17, a);
  generate_dataset(c, 5, 17, b);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(read_manifest(a), rows);
  for (const auto& r : rows) {
    EXPECT_EQ(read_file_bytes(a / r.file), read_file_bytes(b / r.file));
    const Scene s = read_scene_file(a / r.file);
    std::size_t counts[3] = {0, 0, 0};
    for (const auto& l : s.labels) ++counts[static_cast<int>(l.class_id)];
    EXPECT_EQ(r.n_car, counts[0]);
    EXPECT_EQ(r.n_ped, counts[1]);
    EXPECT_EQ(r.n_cyc, counts[2]);
    EXPECT_EQ(r.n_points, s.cloud.size());
    EXPECT_EQ(r.split, split_of(r.scene_id));
  }
  EXPECT_EQ(read_file_bytes(a / kManifestName), read_file_bytes(b / kManifestName));
  EXPECT_EQ(load_split(a, "val").size(), 1u);
  EXPECT_EQ(load_split(a, "train").size(), 4u);
  fs::remove_all(a);
  fs::remove_all(b);
}

}  // namespace
}  // namespace kpd::synth
