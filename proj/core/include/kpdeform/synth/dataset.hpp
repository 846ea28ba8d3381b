#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kpdeform/core/types.hpp"
#include "kpdeform/synth/generator.hpp"

namespace kpd::synth {

struct ManifestRow {
  std::uint32_t scene_id = 0;
  std::string file;
  std::string split;  // "train" or "val"
  std::size_t n_car = 0;
  std::size_t n_ped = 0;
  std::size_t n_cyc = 0;
  std::size_t n_clutter = 0;
  std::size_t n_points = 0;

  friend bool operator==(const ManifestRow&, const ManifestRow&) = default;
};

inline constexpr const char* kManifestName = "manifest.csv";

// Every fifth scene (scene_id % 5 == 4) is validation: an 80/20 split.
std::string split_of(std::uint32_t scene_id);

std::string scene_file_name(std::uint32_t scene_id);

// Writes n_scenes .dscene files plus manifest.csv into out_dir. Scene i is
// generated with config.seed = seed + i.
std::vector<ManifestRow> generate_dataset(const GenConfig& config, std::size_t n_scenes,
                                          std::uint64_t seed,
                                          const std::filesystem::path& out_dir);

std::string manifest_csv(const std::vector<ManifestRow>& rows);
std::vector<ManifestRow> read_manifest(const std::filesystem::path& dir);

// Scenes of one split ("train", "val", or "all"), in scene_id order.
std::vector<Scene> load_split(const std::filesystem::path& dir, const std::string& split);

}  // namespace kpd::synth
