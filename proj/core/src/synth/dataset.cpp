#include "kpdeform/synth/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "kpdeform/core/bytes.hpp"
#include "kpdeform/core/error.hpp"
#include "kpdeform/core/scene_codec.hpp"

namespace kpd::synth {

std::string split_of(std::uint32_t scene_id) { return scene_id % 5 == 4 ? "val" : "train"; }

std::string scene_file_name(std::uint32_t scene_id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "scene_%06u.dscene", scene_id);
  return buf;
}

std::vector<ManifestRow> generate_dataset(const GenConfig& config, std::size_t n_scenes,
                                          std::uint64_t seed,
                                          const std::filesystem::path& out_dir) {
  config.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(Errc::kIo, "cannot create " + out_dir.string() + ": " + ec.message());
  std::vector<ManifestRow> rows;
  for (std::size_t i = 0; i < n_scenes; ++i) {
    const auto id = static_cast<std::uint32_t>(i);
    GenConfig c = config;
    c.seed = seed + i;
    const GeneratedScene g = generate_scene_detailed(c, id);
    ManifestRow row;
    row.scene_id = id;
    row.file = scene_file_name(id);
    row.split = split_of(id);
    for (const auto& o : g.objects) {
      switch (o.kind) {
        case Archetype::kCar: ++row.n_car; break;
        case Archetype::kPedestrian: ++row.n_ped; break;
        case Archetype::kCyclist: ++row.n_cyc; break;
        default: ++row.n_clutter; break;
      }
    }
    row.n_points = g.scene.cloud.size();
    write_scene_file(out_dir / row.file, g.scene);
    rows.push_back(row);
  }
  write_text_atomic(out_dir / kManifestName, manifest_csv(rows));
  return rows;
}

std::string manifest_csv(const std::vector<ManifestRow>& rows) {
  std::ostringstream out;
  out << "scene_id,file,split,n_car,n_ped,n_cyc,n_clutter,n_points\n";
  for (const auto& r : rows) {
    out << r.scene_id << ',' << r.file << ',' << r.split << ',' << r.n_car << ',' << r.n_ped << ','
        << r.n_cyc << ',' << r.n_clutter << ',' << r.n_points << '\n';
  }
  return out.str();
}

std::vector<ManifestRow> read_manifest(const std::filesystem::path& dir) {
  const auto path = dir / kManifestName;
  std::ifstream in(path);
  if (!in) throw Error(Errc::kIo, "no dataset manifest at " + path.string());
  std::string line;
  std::getline(in, line);  // header
  std::vector<ManifestRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string field;
    std::vector<std::string> f;
    while (std::getline(ls, field, ',')) f.push_back(field);
    if (f.size() != 8) {
      throw Error(Errc::kIo, path.string() + ":" + std::to_string(line_no) + ": expected 8 fields");
    }
    try {
      ManifestRow r;
      r.scene_id = static_cast<std::uint32_t>(std::stoul(f[0]));
      r.file = f[1];
      r.split = f[2];
      r.n_car = std::stoul(f[3]);
      r.n_ped = std::stoul(f[4]);
      r.n_cyc = std::stoul(f[5]);
      r.n_clutter = std::stoul(f[6]);
      r.n_points = std::stoul(f[7]);
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw Error(Errc::kIo, path.string() + ":" + std::to_string(line_no) + ": bad number");
    }
  }
  return rows;
}

std::vector<Scene> load_split(const std::filesystem::path& dir, const std::string& split) {
  std::vector<Scene> scenes;
  for (const auto& row : read_manifest(dir)) {
    if (split != "all" && row.split != split) continue;
    scenes.push_back(read_scene_file(dir / row.file));
  }
  return scenes;
}

}  // namespace kpd::synth
