#include <gtest/gtest.h>

#include <filesystem>

#include "kpdeform/core/bytes.hpp"
#include "kpdeform/core/error.hpp"
#include "kpdeform/core/labeling.hpp"
#include "kpdeform/core/scene_codec.hpp"
#include "kpdeform/synth/generator.hpp"

namespace kpd {
namespace {

Scene two_object_scene() {
  Scene s;
  s.scene_id = 42;
  s.cloud = {{0.0, 0.0, 0.0, 0.5}, {1.5, -2.0, 0.3, 1.0}, {10.0, 3.0, -1.0, 0.0}};
  s.labels = {{ClassId::kCarLike, {5.0, 1.0, -0.95}, {4.0, 1.8, 1.5}, 0.3},
              {ClassId::kPedestrianLike, {12.0, -3.0, -0.85}, {0.6, 0.6, 1.7}, -1.0}};
  return s;
}

template <typename Fn>
Errc code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no Error thrown";
  return Errc::kIo;
}

TEST(SceneCodec, EmptyLabelsRoundTrip) {
  Scene s;
  s.scene_id = 1;
  s.cloud = {{1.0, 2.0, 3.0, 0.25}};
  const auto bytes = encode_scene(s);
  EXPECT_EQ(bytes.size(), kSceneHeaderBytes + kScenePointBytes);
  EXPECT_EQ(decode_scene(bytes), s);
}

TEST(SceneCodec, TwoObjectsRoundTripAndDeterministic) {
  const Scene s = two_object_scene();
  const auto a = encode_scene(s);
  const auto b = encode_scene(s);
  EXPECT_EQ(a, b);
  const Scene d = decode_scene(a);
  EXPECT_EQ(d.labels.size(), 2u);
  EXPECT_EQ(d, s);
}

TEST(SceneCodec, HeaderLayoutIsLittleEndian) {
  const auto bytes = encode_scene(two_object_scene());
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "DFRM");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[5], 0);
  EXPECT_EQ(bytes[6], 42);  // scene_id low byte
  EXPECT_EQ(bytes[10], 3);  // point count
  EXPECT_EQ(bytes[14], 2);  // label count
}

TEST(SceneCodec, GeneratedScenesRoundTrip) {
  synth::GenConfig cfg;
  for (std::uint32_t id = 0; id < 5; ++id) {
    const Scene s = synth::generate_scene(cfg, id);
    EXPECT_EQ(decode_scene(encode_scene(s)), s);
  }
}

TEST(SceneCodec, CorruptMagic) {
  auto bytes = encode_scene(two_object_scene());
  bytes[0] = 'X';
  EXPECT_EQ(code_of([&] { decode_scene(bytes); }), Errc::kBadMagic);
}

TEST(SceneCodec, TruncatedMidPoint) {
  auto bytes = encode_scene(two_object_scene());
  bytes.resize(kSceneHeaderBytes + kScenePointBytes + 11);
  EXPECT_EQ(code_of([&] { decode_scene(bytes); }), Errc::kTruncated);
}

TEST(SceneCodec, RejectsInvalidIntensity) {
  Scene s = two_object_scene();
  s.cloud[0].intensity = 1.5;
  EXPECT_EQ(code_of([&] { encode_scene(s); }), Errc::kInvariantViolation);
}

TEST(SceneCodec, FileRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "kpdeform_core_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "one.dscene";
  write_scene_file(path, two_object_scene());
  EXPECT_EQ(read_scene_file(path), two_object_scene());
  std::filesystem::remove_all(dir);
}

TEST(Labeling, InteriorExteriorAndFace) {
  const ObjectLabel box{ClassId::kCyclistLike, {2.0, 3.0, 0.0}, {2.0, 1.0, 1.0}, 0.0};
  const std::vector<ObjectLabel> labels{box};
  const std::vector<Vec3> pts{{2.0, 3.0, 0.0}, {102.0, 3.0, 0.0}, {3.0, 3.0, 0.0}};
  const auto cls = label_keypoints(pts, labels);
  EXPECT_EQ(cls[0], ClassId::kCyclistLike);
  EXPECT_EQ(cls[1], ClassId::kBackground);
  EXPECT_EQ(cls[2], ClassId::kBackground);
}

TEST(Labeling, RespectsYaw) {
  const double half_pi = std::acos(0.0);
  const ObjectLabel box{ClassId::kCarLike, {0.0, 0.0, 0.0}, {4.0, 1.0, 1.0}, half_pi};
  EXPECT_TRUE(inside_box({0.0, 1.5, 0.0}, box));
  EXPECT_FALSE(inside_box({1.5, 0.0, 0.0}, box));
}

TEST(Bytes, ReaderThrowsTruncated) {
  const std::vector<std::uint8_t> two{1, 2};
  ByteReader r(two);
  EXPECT_EQ(code_of([&] { r.u32(); }), Errc::kTruncated);
}

TEST(Rng, MixSeedSeparatesStreams) {
  EXPECT_NE(mix_seed(1, 0), mix_seed(1, 1));
  EXPECT_NE(mix_seed(1, 0), mix_seed(2, 0));
  Rng a(mix_seed(9, 3)), b(mix_seed(9, 3));
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.next(), b.next());
}

}  // namespace
}  // namespace kpd
