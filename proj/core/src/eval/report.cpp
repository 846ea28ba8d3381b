#include "kpdeform/eval/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "kpdeform/core/error.hpp"

namespace kpd::eval {

std::string_view bin_name(DistanceBin b) noexcept {
  switch (b) {
    case DistanceBin::kAll: return "all";
    case DistanceBin::kNear: return "0-30m";
    case DistanceBin::kFar: return "30-50m";
  }
  return "unknown";
}

bool in_bin(DistanceBin b, double range) noexcept {
  switch (b) {
    case DistanceBin::kAll: return true;
    case DistanceBin::kNear: return range >= 0.0 && range < 30.0;
    case DistanceBin::kFar: return range >= 30.0 && range < 50.0;
  }
  return false;
}

const ApCell& EvalReport::cell(ClassId cls, DistanceBin bin, RecallConvention convention) const {
  for (const auto& c : cells) {
    if (c.cls == cls && c.bin == bin && c.convention == convention) return c;
  }
  throw Error(Errc::kInvariantViolation, "report has no such cell");
}

std::vector<ScoredPrediction> predict(const deformnet::PreparedScene& scene,
                                      const diffkit::ParamStore& params,
                                      const deformnet::ModelConfig& config,
                                      const deformnet::Ablation& ablation) {
  const auto fwd = deformnet::forward(scene, params, config, ablation);
  std::vector<ScoredPrediction> out(scene.keypoints.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto p = deformnet::softmax_row(fwd.scores.row(i));
    auto& sp = out[i];
    sp.position = scene.keypoints[i];
    for (int c = 0; c < kNumClasses; ++c) sp.scores[c] = p[c];
    sp.truth = scene.truth[i];
    sp.range = std::hypot(sp.position.x, sp.position.y);
  }
  return out;
}

EvalReport evaluate_predictions(std::span<const ScoredPrediction> pool, std::string variant,
                                std::size_t keypoints) {
  EvalReport report{std::move(variant), keypoints, {}};
  std::vector<RankedItem> items;
  for (int c = 0; c < kNumObjectClasses; ++c) {
    const auto cls = static_cast<ClassId>(c);
    for (DistanceBin bin : kBins) {
      items.clear();
      std::size_t n_pos = 0;
      for (std::size_t i = 0; i < pool.size(); ++i) {
        if (!in_bin(bin, pool[i].range)) continue;
        const bool rel = pool[i].truth == cls;
        n_pos += rel;
        items.push_back({pool[i].scores[c], rel, i});
      }
      for (RecallConvention conv : kConventions) {
        ApCell cell{cls, bin, conv, n_pos, std::nullopt};
        if (n_pos > 0) cell.ap = average_precision(items, conv);
        report.cells.push_back(cell);
      }
    }
  }
  return report;
}

EvalReport evaluate_prepared(std::span<const deformnet::PreparedScene> scenes,
                             const diffkit::ParamStore& params,
                             const deformnet::ModelConfig& config,
                             const deformnet::Ablation& ablation) {
  std::vector<ScoredPrediction> pool;
  std::size_t keypoints = 0;
  for (const auto& s : scenes) {
    auto p = predict(s, params, config, ablation);
    keypoints = std::max(keypoints, s.keypoints.size());
    pool.insert(pool.end(), p.begin(), p.end());
  }
  return evaluate_predictions(pool, deformnet::variant_name(ablation), keypoints);
}

EvalReport evaluate_model(std::span<const Scene> scenes, const diffkit::ParamStore& params,
                          const deformnet::ModelConfig& config,
                          const deformnet::Ablation& ablation, std::size_t keypoints,
                          spatial::SamplerKind sampler, std::uint64_t seed) {
  std::vector<ScoredPrediction> pool;
  for (const auto& s : scenes) {
    const auto prepared = deformnet::prepare_scene(s, config, sampler, keypoints, seed);
    auto p = predict(prepared, params, config, ablation);
    pool.insert(pool.end(), p.begin(), p.end());
  }
  return evaluate_predictions(pool, deformnet::variant_name(ablation), keypoints);
}

std::string format_fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string report_csv(std::span<const EvalReport> reports) {
  std::ostringstream out;
  out << "variant,class,bin,convention,n_pos,ap\n";
  for (const auto& r : reports) {
    for (const auto& c : r.cells) {
      out << r.variant << ',' << class_name(c.cls) << ',' << bin_name(c.bin) << ','
          << convention_name(c.convention) << ',' << c.n_pos << ','
          << (c.ap ? format_fixed6(*c.ap) : std::string("-")) << '\n';
    }
  }
  return out.str();
}

}  // namespace kpd::eval
