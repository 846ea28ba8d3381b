#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "kpdeform/deformnet/config.hpp"
#include "kpdeform/deformnet/trainer.hpp"
#include "kpdeform/synth/generator.hpp"

namespace kpd::cli {

struct RunConfig {
  std::filesystem::path data_dir = "data";
  std::filesystem::path checkpoint_dir = "checkpoints";
  std::filesystem::path report_dir = "reports";

  synth::GenConfig gen;
  std::size_t n_scenes = 250;

  deformnet::ModelConfig model;
  deformnet::TrainConfig train;
  deformnet::Ablation ablation{false, false, false};

  std::string eval_split = "val";
  std::vector<std::size_t> sweep_counts{512, 1024, 1536, 2048};
  std::vector<std::string> sweep_variants{"baseline", "deform", "deform_gate"};

  std::size_t gradcheck_seeds = 20;
  std::string gradcheck_corrupt_op;  // test hook

  // Dimensional consistency of every section; throws Error(kConfig).
  void validate() const;
};

// Applies one key=value assignment. Throws Error(kConfig) naming the key.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

// Parses "key=value" lines; '#' starts a comment. Throws kConfig with the
// path when the file cannot be read and with the key on bad entries.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const std::string& text, const std::string& origin = "config");

std::vector<std::string> known_keys();

// The effective configuration in the same key=value format.
std::string dump_run_config(const RunConfig& config);

}  // namespace kpd::cli
