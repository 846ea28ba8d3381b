#include "run_config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "kpdeform/core/error.hpp"

namespace kpd::cli {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& value, const char* want) {
  throw Error(Errc::kConfig, key + ": '" + value + "' is not " + want);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty()) bad(key, v, "a number");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty()) {
    bad(key, v, "a non-negative integer");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad(key, v, "a boolean (true/false)");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::size_t> to_sizes(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  for (const auto& s : split_list(v)) out.push_back(to_u64(key, s));
  if (out.empty()) bad(key, v, "a non-empty comma-separated list");
  return out;
}

std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Field {
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
Field size_field(T RunConfig::*section, std::size_t T::*member) {
  return {[=](RunConfig& c, const std::string& k, const std::string& v) {
            c.*section.*member = static_cast<std::size_t>(to_u64(k, v));
          },
          [=](const RunConfig& c) { return std::to_string(c.*section.*member); }};
}

template <typename T>
Field double_field(T RunConfig::*section, double T::*member) {
  return {[=](RunConfig& c, const std::string& k, const std::string& v) {
            c.*section.*member = to_double(k, v);
          },
          [=](const RunConfig& c) { return num(c.*section.*member); }};
}

Field path_field(std::filesystem::path RunConfig::*member) {
  return {[=](RunConfig& c, const std::string&, const std::string& v) { c.*member = v; },
          [=](const RunConfig& c) { return (c.*member).string(); }};
}

const std::map<std::string, Field>& fields() {
  using deformnet::ModelConfig;
  using synth::GenConfig;
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> t;
    t["paths.data"] = path_field(&RunConfig::data_dir);
    t["paths.checkpoints"] = path_field(&RunConfig::checkpoint_dir);
    t["paths.reports"] = path_field(&RunConfig::report_dir);

    t["gen.n_scenes"] = {[](RunConfig& c, const std::string& k, const std::string& v) {
                           c.n_scenes = to_u64(k, v);
                         },
                         [](const RunConfig& c) { return std::to_string(c.n_scenes); }};
    t["gen.extent"] = double_field(&RunConfig::gen, &GenConfig::extent);
    t["gen.range_min"] = double_field(&RunConfig::gen, &GenConfig::range_min);
    t["gen.range_max"] = double_field(&RunConfig::gen, &GenConfig::range_max);
    t["gen.fov_deg"] = double_field(&RunConfig::gen, &GenConfig::fov_deg);
    t["gen.n_car"] = size_field(&RunConfig::gen, &GenConfig::n_car);
    t["gen.n_pedestrian"] = size_field(&RunConfig::gen, &GenConfig::n_pedestrian);
    t["gen.n_cyclist"] = size_field(&RunConfig::gen, &GenConfig::n_cyclist);
    t["gen.n_pole"] = size_field(&RunConfig::gen, &GenConfig::n_pole);
    t["gen.n_seated"] = size_field(&RunConfig::gen, &GenConfig::n_seated);
    t["gen.density"] = double_field(&RunConfig::gen, &GenConfig::density);
    t["gen.n_ground"] = size_field(&RunConfig::gen, &GenConfig::n_ground);
    t["gen.ground_z"] = double_field(&RunConfig::gen, &GenConfig::ground_z);
    t["gen.noise_sigma"] = double_field(&RunConfig::gen, &GenConfig::noise_sigma);
    t["gen.jitter"] = double_field(&RunConfig::gen, &GenConfig::jitter);
    t["gen.min_gap"] = double_field(&RunConfig::gen, &GenConfig::min_gap);
    t["gen.max_attempts"] = size_field(&RunConfig::gen, &GenConfig::max_attempts);
    t["gen.seed"] = {[](RunConfig& c, const std::string& k, const std::string& v) {
                       c.gen.seed = to_u64(k, v);
                     },
                     [](const RunConfig& c) { return std::to_string(c.gen.seed); }};

    auto model = [](auto get_member) {
      return Field{[=](RunConfig& c, const std::string& k, const std::string& v) {
                     auto& m = get_member(c.model);
                     using M = std::remove_reference_t<decltype(m)>;
                     if constexpr (std::is_same_v<M, double>) {
                       m = to_double(k, v);
                     } else if constexpr (std::is_same_v<M, bool>) {
                       m = to_bool(k, v);
                     } else {
                       m = static_cast<M>(to_u64(k, v));
                     }
                   },
                   [=](const RunConfig& c) {
                     auto& m = get_member(const_cast<ModelConfig&>(c.model));
                     using M = std::remove_reference_t<decltype(m)>;
                     if constexpr (std::is_same_v<M, double>) {
                       return num(m);
                     } else if constexpr (std::is_same_v<M, bool>) {
                       return std::string(m ? "true" : "false");
                     } else {
                       return std::to_string(m);
                     }
                   }};
    };
    t["encoder.radius"] = model([](ModelConfig& m) -> double& { return m.encoder.radius; });
    t["encoder.max_samples"] =
        model([](ModelConfig& m) -> std::size_t& { return m.encoder.max_samples; });
    t["deform.k_def"] = model([](ModelConfig& m) -> std::size_t& { return m.deform.k_def; });
    t["deform.d_feat"] = model([](ModelConfig& m) -> std::size_t& { return m.deform.d_feat; });
    t["deform.d_off"] = model([](ModelConfig& m) -> std::size_t& { return m.deform.d_off; });
    t["deform.delta_max"] = model([](ModelConfig& m) -> double& { return m.deform.delta_max; });
    t["deform.zero_align_init"] =
        model([](ModelConfig& m) -> bool& { return m.deform.zero_align_init; });
    t["sa.radius"] = model([](ModelConfig& m) -> double& { return m.sa.radius; });
    t["sa.max_samples"] = model([](ModelConfig& m) -> std::size_t& { return m.sa.max_samples; });
    t["sa.mlp"] = {[](RunConfig& c, const std::string& k, const std::string& v) {
                     c.model.sa.mlp = to_sizes(k, v);
                   },
                   [](const RunConfig& c) { return join(c.model.sa.mlp); }};
    t["gate.d_in"] = model([](ModelConfig& m) -> std::size_t& { return m.gate.d_in; });
    t["gate.d_out"] = model([](ModelConfig& m) -> std::size_t& { return m.gate.d_out; });

    using deformnet::TrainConfig;
    t["train.epochs"] = size_field(&RunConfig::train, &TrainConfig::epochs);
    t["train.lr"] = double_field(&RunConfig::train, &TrainConfig::lr);
    t["train.batch_scenes"] = size_field(&RunConfig::train, &TrainConfig::batch_scenes);
    t["train.keypoints"] = size_field(&RunConfig::train, &TrainConfig::keypoints);
    t["train.seed"] = {[](RunConfig& c, const std::string& k, const std::string& v) {
                         c.train.seed = to_u64(k, v);
                       },
                       [](const RunConfig& c) { return std::to_string(c.train.seed); }};
    t["train.sampler"] = {[](RunConfig& c, const std::string& k, const std::string& v) {
                            const auto kind = spatial::parse_sampler(v);
                            if (!kind) bad(k, v, "a sampler (fps|random)");
                            c.train.sampler = *kind;
                          },
                          [](const RunConfig& c) {
                            return std::string(spatial::sampler_name(c.train.sampler));
                          }};
    t["ablation.deform"] = {[](RunConfig& c, const std::string& k, const std::string& v) {
                              c.ablation.use_deform = to_bool(k, v);
                            },
                            [](const RunConfig& c) {
                              return std::string(c.ablation.use_deform ? "true" : "false");
                            }};
    t["ablation.gate"] = {[](RunConfig& c, const std::string& k, const std::string& v) {
                            c.ablation.use_gate = to_bool(k, v);
                          },
                          [](const RunConfig& c) {
                            return std::string(c.ablation.use_gate ? "true" : "false");
                          }};
    t["eval.split"] = {[](RunConfig& c, const std::string& k, const std::string& v) {
                         if (v != "train" && v != "val" && v != "all") {
                           bad(k, v, "a split (train|val|all)");
                         }
                         c.eval_split = v;
                       },
                       [](const RunConfig& c) { return c.eval_split; }};
    t["sweep.counts"] = {[](RunConfig& c, const std::string& k, const std::string& v) {
                           c.sweep_counts = to_sizes(k, v);
                         },
                         [](const RunConfig& c) { return join(c.sweep_counts); }};
    t["sweep.variants"] = {[](RunConfig& c, const std::string& k, const std::string& v) {
                             auto names = split_list(v);
                             for (const auto& n : names) {
                               deformnet::Ablation a;
                               if (!deformnet::parse_variant(n, a)) {
                                 bad(k, n, "a variant (baseline|deform|gate|deform_gate)");
                               }
                             }
                             if (names.empty()) bad(k, v, "a non-empty variant list");
                             c.sweep_variants = names;
                           },
                           [](const RunConfig& c) { return join(c.sweep_variants); }};
    t["gradcheck.seeds"] = {[](RunConfig& c, const std::string& k, const std::string& v) {
                              c.gradcheck_seeds = to_u64(k, v);
                            },
                            [](const RunConfig& c) { return std::to_string(c.gradcheck_seeds); }};
    t["gradcheck.corrupt_op"] = {[](RunConfig& c, const std::string&, const std::string& v) {
                                   c.gradcheck_corrupt_op = v;
                                 },
                                 [](const RunConfig& c) { return c.gradcheck_corrupt_op; }};
    return t;
  }();
  return table;
}

}  // namespace

void RunConfig::validate() const {
  gen.validate();
  model.validate();
  if (n_scenes == 0) throw Error(Errc::kConfig, "gen.n_scenes: must be >= 1");
  if (train.epochs == 0) throw Error(Errc::kConfig, "train.epochs: must be >= 1");
  if (!(train.lr > 0.0)) throw Error(Errc::kConfig, "train.lr: must be > 0");
  if (train.batch_scenes == 0) throw Error(Errc::kConfig, "train.batch_scenes: must be >= 1");
  if (train.keypoints == 0) throw Error(Errc::kConfig, "train.keypoints: must be >= 1");
  if (ablation.use_deform && train.keypoints <= model.deform.k_def) {
    throw Error(Errc::kConfig, "train.keypoints: must exceed deform.k_def (" +
                                   std::to_string(model.deform.k_def) + ") when deforming");
  }
  for (std::size_t k : sweep_counts) {
    if (k <= model.deform.k_def) {
      throw Error(Errc::kConfig, "sweep.counts: " + std::to_string(k) +
                                     " must exceed deform.k_def");
    }
  }
  if (gradcheck_seeds == 0) throw Error(Errc::kConfig, "gradcheck.seeds: must be >= 1");
}

void apply_setting(RunConfig& config, const std::string& key, const std::string& value) {
  const auto& table = fields();
  const auto it = table.find(key);
  if (it == table.end()) throw Error(Errc::kConfig, key + ": unknown key");
  it->second.set(config, key, value);
}

RunConfig parse_run_config(const std::string& text, const std::string& origin) {
  RunConfig config;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(Errc::kConfig, origin + ":" + std::to_string(line_no) + ": expected key=value");
    }
    apply_setting(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kConfig, "cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path.string());
}

std::vector<std::string> known_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, f] : fields()) keys.push_back(k);
  return keys;
}

std::string dump_run_config(const RunConfig& config) {
  std::string out;
  for (const auto& [k, f] : fields()) out += k + "=" + f.get(config) + "\n";
  return out;
}

}  // namespace kpd::cli
