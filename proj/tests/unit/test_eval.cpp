#include <gtest/gtest.h>

#include <filesystem>

#include "kpdeform/core/error.hpp"
#include "kpdeform/core/rng.hpp"
#include "kpdeform/deformnet/params.hpp"
#include "kpdeform/diffkit/checkpoint.hpp"
#include "kpdeform/eval/average_precision.hpp"
#include "kpdeform/eval/report.hpp"
#include "kpdeform/eval/sweep.hpp"
#include "kpdeform/synth/generator.hpp"

namespace kpd::eval {
namespace {

std::vector<RankedItem> ranked(const std::vector<int>& relevance) {
  std::vector<RankedItem> items;
  for (std::size_t i = 0; i < relevance.size(); ++i) {
    items.push_back({1.0 - 0.001 * static_cast<double>(i), relevance[i] != 0, i});
  }
  return items;
}

TEST(AveragePrecision, PerfectRanking) {
  const auto items = ranked({1, 1, 1, 0, 0});
  EXPECT_EQ(average_precision(items, RecallConvention::kR11), 1.0);
  EXPECT_EQ(average_precision(items, RecallConvention::kR40), 1.0);
}

TEST(AveragePrecision, HandExample) {
  const auto items = ranked({1, 0, 1, 1});
  EXPECT_NEAR(average_precision(items, RecallConvention::kR11), 0.840909, 5e-7);
  EXPECT_EQ(average_precision_exact(items, RecallConvention::kR11), Rational(37, 44));
}

TEST(AveragePrecision, SinglePositiveAtBottom) {
  std::vector<int> rel(100, 0);
  rel.back() = 1;
  EXPECT_NEAR(average_precision(ranked(rel), RecallConvention::kR11), 0.01, 1e-15);
  EXPECT_EQ(average_precision_exact(ranked(rel), RecallConvention::kR40), Rational(1, 100));
}

TEST(AveragePrecision, TiesRankLowerIndexFirst) {
  const std::vector<RankedItem> items{{0.5, false, 0}, {0.5, true, 1}};
  EXPECT_EQ(ranking_order(items), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(average_precision_exact(items, RecallConvention::kR11), Rational(1, 2));
}

TEST(AveragePrecision, NoPositives) {
  try {
    average_precision(ranked({0, 0}), RecallConvention::kR40);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kNoPositives);
  }
}

TEST(AveragePrecision, RandomScoresApproachPrevalence) {
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    std::vector<RankedItem> items(4000);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
      items[i] = {rng.uniform(), rng.uniform() < 0.3, i};
      pos += items[i].relevant;
    }
    const double ap = average_precision(items, RecallConvention::kR40);
    const double prevalence = static_cast<double>(pos) / static_cast<double>(items.size());
    EXPECT_NEAR(ap, prevalence, 0.05) << seed;
    total += ap;
  }
  EXPECT_NEAR(total / 20.0, 0.3, 0.05);
}

ScoredPrediction pred(ClassId truth, double range, ClassId predicted) {
  ScoredPrediction p;
  p.truth = truth;
  p.range = range;
  p.position = {range, 0, 0};
  p.scores[static_cast<int>(predicted)] = 1.0;
  return p;
}

TEST(Report, OracleDetectorAndAbsentCell) {
  std::vector<ScoredPrediction> pool;
  for (int i = 0; i < 6; ++i) {
    pool.push_back(pred(ClassId::kCarLike, 10.0 + i, ClassId::kCarLike));
    pool.push_back(pred(ClassId::kCyclistLike, 35.0 + i, ClassId::kCyclistLike));
    pool.push_back(pred(ClassId::kPedestrianLike, 5.0 + i, ClassId::kPedestrianLike));
    pool.push_back(pred(ClassId::kBackground, 45.0, ClassId::kBackground));
  }
  const auto r = evaluate_predictions(pool, "deform_gate", 512);
  EXPECT_EQ(r.cells.size(), 3u * 3u * 2u);
  for (const auto& c : r.cells) {
    if (c.n_pos > 0) {
      EXPECT_EQ(*c.ap, 1.0);
    } else {
      EXPECT_FALSE(c.ap.has_value());
    }
  }
  EXPECT_FALSE(r.cell(ClassId::kPedestrianLike, DistanceBin::kFar, RecallConvention::kR40).ap);
  const EvalReport reports[] = {r};
  const std::string csv = report_csv(reports);
  EXPECT_EQ(csv.rfind("variant,class,bin,convention,n_pos,ap\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 19);
  EXPECT_NE(csv.find("deform_gate,PedestrianLike,30-50m,R40,0,-\n"), std::string::npos);
  EXPECT_NE(csv.find("deform_gate,CarLike,all,R11,6,1.000000\n"), std::string::npos);
}

TEST(Report, BinEdges) {
  EXPECT_TRUE(in_bin(DistanceBin::kNear, 29.999));
  EXPECT_FALSE(in_bin(DistanceBin::kNear, 30.0));
  EXPECT_TRUE(in_bin(DistanceBin::kFar, 30.0));
  EXPECT_FALSE(in_bin(DistanceBin::kFar, 50.0));
}

class SweepTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() / "kpdeform_sweep_test";
    std::filesystem::remove_all(dir_);
    std::filesystem::create_directories(dir_);
    config_.deform.d_feat = 4;
    config_.deform.d_off = 4;
    config_.sa.mlp = {6};
    config_.gate = {6, 6};
    synth::GenConfig g;
    g.n_ground = 300;
    for (std::uint32_t i = 0; i < 2; ++i) scenes_.push_back(synth::generate_scene(g, i));
    for (const std::string v : {"baseline", "deform_gate"}) {
      deformnet::Ablation ab;
      deformnet::parse_variant(v, ab);
      for (std::size_t k : counts_) {
        deformnet::ModelConfig c = config_;
        c.deform.zero_align_init = false;
        diffkit::save_checkpoint(checkpoint_path(dir_, v, k),
                                 deformnet::init_model_params(c, ab, k));
      }
    }
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  std::filesystem::path dir_;
  deformnet::ModelConfig config_;
  std::vector<Scene> scenes_;
  std::vector<std::size_t> counts_{32, 48, 64, 80};
  std::vector<std::string> variants_{"baseline", "deform_gate"};
};

TEST_F(SweepTest, RowsDeterministicAndConsistent) {
  const auto rows = keypoint_count_sweep(dir_, variants_, counts_, scenes_, config_,
                                         spatial::SamplerKind::kFarthestPoint, 3);
  ASSERT_EQ(rows.size(), 24u);
  const std::string csv = sweep_csv(rows);
  EXPECT_EQ(csv.rfind("variant,count,class,ap\n", 0), 0u);
  EXPECT_EQ(csv, sweep_csv(keypoint_count_sweep(dir_, variants_, counts_, scenes_, config_,
                                                spatial::SamplerKind::kFarthestPoint, 3)));

  const auto params = diffkit::load_checkpoint(checkpoint_path(dir_, "deform_gate", 48));
  const auto report = evaluate_model(scenes_, params, config_, {true, true, false}, 48,
                                     spatial::SamplerKind::kFarthestPoint, 3);
  for (const auto& r : rows) {
    if (r.variant != "deform_gate" || r.count != 48) continue;
    EXPECT_EQ(r.ap, report.cell(r.cls, DistanceBin::kAll, RecallConvention::kR40).ap);
  }
}

TEST_F(SweepTest, MissingCheckpoint) {
  std::filesystem::remove(checkpoint_path(dir_, "baseline", 64));
  try {
    keypoint_count_sweep(dir_, variants_, counts_, scenes_, config_,
                         spatial::SamplerKind::kFarthestPoint, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kMissingCheckpoint);
  }
}

}  // namespace
}  // namespace kpd::eval
