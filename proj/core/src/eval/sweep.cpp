#include "kpdeform/eval/sweep.hpp"

#include <sstream>

#include "kpdeform/core/error.hpp"
#include "kpdeform/deformnet/params.hpp"
#include "kpdeform/diffkit/checkpoint.hpp"
#include "kpdeform/eval/report.hpp"

namespace kpd::eval {

std::filesystem::path checkpoint_path(const std::filesystem::path& dir, const std::string& variant,
                                      std::size_t count) {
  return dir / (variant + "_k" + std::to_string(count) + ".dckpt");
}

std::vector<SweepRow> keypoint_count_sweep(const std::filesystem::path& checkpoint_dir,
                                           std::span<const std::string> variants,
                                           std::span<const std::size_t> counts,
                                           std::span<const Scene> scenes,
                                           const deformnet::ModelConfig& config,
                                           spatial::SamplerKind sampler, std::uint64_t seed) {
  for (const auto& v : variants) {
    deformnet::Ablation ab;
    if (!deformnet::parse_variant(v, ab)) throw Error(Errc::kConfig, "unknown variant " + v);
    for (std::size_t k : counts) {
      const auto path = checkpoint_path(checkpoint_dir, v, k);
      if (!std::filesystem::exists(path)) {
        throw Error(Errc::kMissingCheckpoint, "sweep needs " + path.string());
      }
    }
  }
  std::vector<SweepRow> rows;
  for (const auto& v : variants) {
    deformnet::Ablation ab;
    deformnet::parse_variant(v, ab);
    for (std::size_t k : counts) {
      const auto params = diffkit::load_checkpoint(checkpoint_path(checkpoint_dir, v, k));
      deformnet::check_model_params(params, config, ab);
      const auto report = evaluate_model(scenes, params, config, ab, k, sampler, seed);
      for (int c = 0; c < kNumObjectClasses; ++c) {
        const auto cls = static_cast<ClassId>(c);
        rows.push_back({v, k, cls, report.cell(cls, DistanceBin::kAll, RecallConvention::kR40).ap});
      }
    }
  }
  return rows;
}

std::string sweep_csv(std::span<const SweepRow> rows) {
  std::ostringstream out;
  out << "variant,count,class,ap\n";
  for (const auto& r : rows) {
    out << r.variant << ',' << r.count << ',' << class_name(r.cls) << ','
        << (r.ap ? format_fixed6(*r.ap) : std::string("-")) << '\n';
  }
  return out.str();
}

}  // namespace kpd::eval
