// Acceptance run: one PASS/FAIL line per criterion, exit 0 iff all pass.
//   kpdeform_acceptance [--only 1,2,...] [--config PATH] [--work DIR]

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "kpdeform/core/bytes.hpp"
#include "kpdeform/core/rng.hpp"
#include "kpdeform/deformnet/gradcheck_suite.hpp"
#include "kpdeform/deformnet/model.hpp"
#include "kpdeform/deformnet/params.hpp"
#include "kpdeform/deformnet/stages.hpp"
#include "kpdeform/diffkit/ops.hpp"
#include "kpdeform/eval/average_precision.hpp"
#include "kpdeform/spatial/grid_index.hpp"
#include "kpdeform/spatial/queries.hpp"
#include "kpdeform/spatial/sampling.hpp"
#include "kpdeform/synth/generator.hpp"

namespace fs = std::filesystem;
using namespace kpd;
using diffkit::Tensor;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ------------------------------------------------------------------ 1

Outcome gradient_fidelity() {
  const auto t0 = Clock::now();
  deformnet::GradCheckSuiteOptions opts;
  opts.seeds = 20;
  const auto r = deformnet::run_gradcheck_suite(opts);
  double worst_prim = 0.0, worst_e2e = 0.0;
  for (const auto& rep : r.reports) {
    double& w = rep.name == "end_to_end" ? worst_e2e : worst_prim;
    w = std::max(w, rep.max_rel_error);
  }
  deformnet::GradCheckSuiteOptions bad = opts;
  bad.corrupt_op = "end_to_end";
  const bool caught = !deformnet::run_gradcheck("end_to_end", 1, bad).passed;
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = r.passed && caught && secs < 60.0;
  o.detail = std::to_string(r.reports.size()) + " checks over 20 seeds, worst primitive " +
             fmt("%.2e", worst_prim) + ", worst end-to-end " + fmt("%.2e", worst_e2e) +
             ", corruption caught=" + (caught ? "yes" : "no") + ", " + fmt("%.1f", secs) + " s";
  return o;
}

// ------------------------------------------------------------------ 2

deformnet::ModelConfig small_model() {
  deformnet::ModelConfig c;
  c.deform.d_feat = 8;
  c.deform.d_off = 8;
  c.deform.zero_align_init = false;
  c.sa.mlp = {8, 12};
  c.gate = {12, 12};
  return c;
}

Scene small_scene(std::uint32_t id) {
  synth::GenConfig g;
  g.n_ground = 500;
  return synth::generate_scene(g, id);
}

double rel_diff(const Tensor& a, const Tensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(a[i])));
  }
  return m;
}

Outcome structural_invariants() {
  const auto t0 = Clock::now();
  Outcome o;
  std::ostringstream why;
  const auto cfg = small_model();
  const deformnet::Ablation full{true, true, false};

  // Translation: v' shifts with the scene, features and scores do not move.
  double worst_translation = 0.0;
  for (std::uint32_t s = 0; s < 5; ++s) {
    Rng rng(mix_seed(11, s));
    const Scene scene = small_scene(s);
    auto params = deformnet::init_model_params(cfg, full, s);
    params.at(deformnet::pname::kAlign).value *= 5.0;
    const Vec3 t{rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(-5, 5)};
    Scene moved = scene;
    for (auto& p : moved.cloud) {
      p.x += t.x;
      p.y += t.y;
      p.z += t.z;
    }
    for (auto& l : moved.labels) l.center = l.center + t;
    const auto idx = spatial::farthest_point_sampling(positions_of(scene.cloud), 128, s);
    const auto a = deformnet::forward(deformnet::prepare_scene(scene, idx, cfg, s), params, cfg, full);
    const auto b = deformnet::forward(deformnet::prepare_scene(moved, idx, cfg, s), params, cfg, full);
    worst_translation = std::max({worst_translation, rel_diff(a.scores, b.scores),
                                  rel_diff(a.sa.features, b.sa.features),
                                  rel_diff(a.encoded->features, b.encoded->features),
                                  rel_diff(a.edges->offset, b.edges->offset)});
    for (std::size_t i = 0; i < a.deformed.size(); ++i) {
      const Vec3 d = b.deformed[i] - (a.deformed[i] + t);
      for (int k = 0; k < 3; ++k) {
        worst_translation = std::max(worst_translation,
                                     std::abs(d[k]) / std::max(1.0, std::abs(b.deformed[i][k])));
      }
    }
  }
  const bool translation_ok = worst_translation <= 1e-9;
  why << "translation " << fmt("%.1e", worst_translation);

  // Displacement bound over 1e4 random draws, including saturating weights.
  std::size_t bound_violations = 0;
  Rng rng(2024);
  for (int draw = 0; draw < 10000; ++draw) {
    const std::size_t n = 1 + rng.index(4), d_off = 1 + rng.index(6);
    const double delta = std::exp(rng.uniform(std::log(0.05), std::log(5.0)));
    const double scale = std::exp(rng.uniform(std::log(1e-3), std::log(1e8)));
    std::vector<Vec3> v(n);
    for (auto& p : v) p = {rng.uniform(-100, 100), rng.uniform(-100, 100), rng.uniform(-5, 5)};
    Tensor off({n, d_off}), w({3, d_off});
    for (double& x : off.values()) x = rng.uniform(0, 2);
    for (double& x : w.values()) x = scale * rng.uniform(-1, 1);
    const auto r = deformnet::deform_positions(v, off, w, delta);
    for (std::size_t i = 0; i < n; ++i) {
      const Vec3 d = r.deformed[i] - v[i];
      for (int k = 0; k < 3; ++k) bound_violations += !(std::abs(d[k]) < delta);
    }
  }
  why << ", displacement violations " << bound_violations << "/1e4 draws";

  // Gate strictly inside (0, 1), also under extreme pre-activations.
  std::size_t gate_violations = 0;
  for (int draw = 0; draw < 200; ++draw) {
    const double scale = std::exp(rng.uniform(std::log(1e-2), std::log(1e6)));
    Tensor a({8, 5}), wg({4, 5}), bg({4}), fc({4, 5});
    for (Tensor* t : {&a, &wg, &bg, &fc}) {
      for (double& x : t->values()) x = scale * rng.uniform(-1, 1);
    }
    const auto gated = deformnet::context_gate(a, wg, bg, fc);
    for (double g : gated.gate.values()) {
      gate_violations += !(g > 0.0 && g < 1.0);
    }
  }
  why << ", gate violations " << gate_violations;

  // Permutation invariance: shuffled cloud and shuffled group order.
  bool perm_ok = true;
  for (std::uint32_t s = 0; s < 3; ++s) {
    auto c = cfg;
    c.encoder.max_samples = 1u << 20;
    c.sa.max_samples = 1u << 20;
    const Scene scene = small_scene(20 + s);
    const auto params = deformnet::init_model_params(c, full, 40 + s);
    const auto p0 = deformnet::prepare_scene(scene, c, spatial::SamplerKind::kFarthestPoint, 96, s);
    std::vector<std::size_t> perm(scene.cloud.size());
    std::iota(perm.begin(), perm.end(), 0);
    Rng prng(s);
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[prng.index(i)]);
    std::vector<std::size_t> inverse(perm.size());
    Scene shuffled = scene;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      shuffled.cloud[i] = scene.cloud[perm[i]];
      inverse[perm[i]] = i;
    }
    std::vector<std::size_t> kp;
    for (std::size_t i : p0.keypoint_indices) kp.push_back(inverse[i]);
    const auto p1 = deformnet::prepare_scene(shuffled, kp, c, p0.group_seed);
    perm_ok = perm_ok && deformnet::forward(p0, params, c, full).scores ==
                             deformnet::forward(p1, params, c, full).scores;
  }
  for (int draw = 0; draw < 100; ++draw) {
    Tensor f({30, 4});
    for (double& x : f.values()) x = rng.uniform(-1, 1);
    std::vector<std::vector<std::size_t>> lists(5), shuffled(5);
    for (std::size_t i = 0; i < 30; ++i) lists[rng.index(5)].push_back(i);
    for (std::size_t g = 0; g < 5; ++g) {
      shuffled[g] = lists[g];
      for (std::size_t i = shuffled[g].size(); i > 1; --i) {
        std::swap(shuffled[g][i - 1], shuffled[g][rng.index(i)]);
      }
    }
    for (auto kind : {diffkit::Pool::kMean, diffkit::Pool::kMax}) {
      const auto a = diffkit::pool_over_set(kind, Ragged::from_lists(lists), f,
                                            diffkit::EmptyGroupPolicy::kZeroFallback);
      const auto b = diffkit::pool_over_set(kind, Ragged::from_lists(shuffled), f,
                                            diffkit::EmptyGroupPolicy::kZeroFallback);
      perm_ok = perm_ok && a.output == b.output;
    }
  }
  why << ", permutation " << (perm_ok ? "bit-exact" : "MISMATCH");

  // Ablation identities, bit-level.
  bool ablation_ok = true;
  for (std::uint32_t s = 0; s < 3; ++s) {
    const auto scene = deformnet::prepare_scene(small_scene(30 + s), cfg,
                                                spatial::SamplerKind::kFarthestPoint, 96, s);
    auto deform = deformnet::init_model_params(cfg, {true, false, false}, s);
    deform.at(deformnet::pname::kAlign).value.fill(0.0);
    const auto base = deformnet::init_model_params(cfg, {false, false, false}, s);
    const auto plain = deformnet::forward(scene, base, cfg, {false, false, false});
    ablation_ok = ablation_ok &&
                  deformnet::forward(scene, deform, cfg, {true, false, false}).scores == plain.scores;

    const auto gated = deformnet::init_model_params(cfg, {false, true, false}, s);
    const Tensor fc = diffkit::linear(plain.sa.features, gated.value(deformnet::pname::kFc));
    const Tensor& hb = gated.value(deformnet::pname::kHeadBias);
    ablation_ok = ablation_ok &&
                  deformnet::forward(scene, gated, cfg, {false, true, true}).scores ==
                      diffkit::linear(fc, gated.value(deformnet::pname::kHeadWeight), &hb);
    auto identity = gated;
    auto& w = identity.at(deformnet::pname::kFc).value;
    w.fill(0.0);
    for (std::size_t i = 0; i < cfg.gate.d_in; ++i) w.at(i, i) = 1.0;
    identity.at(deformnet::pname::kHeadWeight).value = base.value(deformnet::pname::kHeadWeight);
    ablation_ok = ablation_ok &&
                  deformnet::forward(scene, identity, cfg, {false, true, true}).scores == plain.scores;
  }
  why << ", ablation identities " << (ablation_ok ? "bit-exact" : "MISMATCH");
  why << ", " << fmt("%.1f", seconds_since(t0)) << " s";

  o.pass = translation_ok && bound_violations == 0 && gate_violations == 0 && perm_ok && ablation_ok;
  o.detail = why.str();
  return o;
}

// ------------------------------------------------------------------ 3

std::vector<Vec3> random_points(Rng& rng, std::size_t n, bool clustered) {
  std::vector<Vec3> p(n);
  for (auto& v : p) {
    if (clustered && !p.empty() && rng.uniform() < 0.3 && &v != &p[0]) {
      v = p[rng.index(static_cast<std::size_t>(&v - &p[0]))];  // exact duplicate
    } else {
      v = {rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-2, 2)};
    }
  }
  return p;
}

using eval::Rational;

Rational ap_from_definition(const std::vector<eval::RankedItem>& items, eval::RecallConvention conv) {
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (items[a].score != items[b].score) return items[a].score > items[b].score;
    return items[a].index < items[b].index;
  });
  long npos = 0;
  for (const auto& it : items) npos += it.relevant;
  std::vector<Rational> recall, precision;
  long tp = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    tp += items[order[k]].relevant;
    recall.emplace_back(tp, npos);
    precision.emplace_back(tp, static_cast<long>(k + 1));
  }
  std::vector<Rational> levels;
  if (conv == eval::RecallConvention::kR11) {
    for (int i = 0; i <= 10; ++i) levels.emplace_back(i, 10);
  } else {
    for (int i = 1; i <= 40; ++i) levels.emplace_back(i, 40);
  }
  Rational sum = 0;
  for (const auto& r : levels) {
    Rational best = 0;
    for (std::size_t k = 0; k < recall.size(); ++k) {
      if (recall[k] >= r && precision[k] > best) best = precision[k];
    }
    sum += best;
  }
  return sum / static_cast<long>(levels.size());
}

Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  std::size_t knn_bad = 0, radius_bad = 0, fps_bad = 0, ap_bad = 0;
  for (std::uint64_t inst = 0; inst < 1000; ++inst) {
    Rng rng(mix_seed(3, inst));
    const std::size_t n = 1 + rng.index(300);
    const auto src = random_points(rng, n, inst % 2 == 0);
    const auto queries = random_points(rng, 1 + rng.index(20), false);

    const std::size_t k = 1 + rng.index(std::min<std::size_t>(n, 16));
    const auto knn = spatial::knn_query(spatial::GridIndex::for_knn(src), queries, k);
    for (std::size_t q = 0; q < queries.size(); ++q) {
      std::vector<std::pair<double, std::size_t>> all;
      for (std::size_t i = 0; i < n; ++i) all.push_back({squared_distance(src[i], queries[q]), i});
      std::sort(all.begin(), all.end());
      const auto got = knn.lists[q];
      bool same = got.size() == k;
      for (std::size_t j = 0; same && j < k; ++j) same = got[j] == all[j].second;
      knn_bad += !same;
    }

    const double radius = rng.uniform(0.3, 3.0);
    const std::size_t cap = 1 + rng.index(32);
    const spatial::GridIndex grid(src, radius);
    const auto full = spatial::radius_group(grid, queries, radius, n, inst);
    const auto sub = spatial::radius_group(grid, queries, radius, cap, inst);
    for (std::size_t q = 0; q < queries.size(); ++q) {
      std::vector<std::size_t> expect;
      for (std::size_t i = 0; i < n; ++i) {
        if (squared_distance(src[i], queries[q]) <= radius * radius) expect.push_back(i);
      }
      const auto f = full.lists[q];
      const auto s = sub.lists[q];
      bool ok = std::vector<std::size_t>(f.begin(), f.end()) == expect;
      ok = ok && s.size() == std::min(cap, expect.size()) && std::is_sorted(s.begin(), s.end()) &&
           std::includes(expect.begin(), expect.end(), s.begin(), s.end());
      radius_bad += !ok;
    }

    const std::size_t kf = 1 + rng.index(std::min<std::size_t>(n, 40));
    const auto sel = spatial::farthest_point_sampling(src, kf, inst);
    std::vector<double> min_d(n, std::numeric_limits<double>::infinity());
    std::vector<bool> taken(n, false);
    taken[sel[0]] = true;
    for (std::size_t i = 0; i < n; ++i) min_d[i] = squared_distance(src[i], src[sel[0]]);
    for (std::size_t t = 1; t < sel.size(); ++t) {
      for (std::size_t i = 0; i < n; ++i) {
        if (!taken[i] && min_d[i] > min_d[sel[t]]) {
          ++fps_bad;
          break;
        }
      }
      taken[sel[t]] = true;
      for (std::size_t i = 0; i < n; ++i) {
        min_d[i] = std::min(min_d[i], squared_distance(src[i], src[sel[t]]));
      }
    }

    std::vector<eval::RankedItem> items(1 + rng.index(60));
    bool any = false;
    for (std::size_t i = 0; i < items.size(); ++i) {
      items[i] = {static_cast<double>(rng.index(8)) / 8.0, rng.uniform() < 0.4, i};
      any = any || items[i].relevant;
    }
    if (!any) items[rng.index(items.size())].relevant = true;
    for (auto conv : {eval::RecallConvention::kR11, eval::RecallConvention::kR40}) {
      const Rational exact = eval::average_precision_exact(items, conv);
      const Rational oracle = ap_from_definition(items, conv);
      const double approx = eval::average_precision(items, conv);
      ap_bad += exact != oracle || std::abs(approx - oracle.convert_to<double>()) > 1e-12;
    }
  }
  std::vector<eval::RankedItem> hand;
  const int rel[] = {1, 0, 1, 1};
  for (std::size_t i = 0; i < 4; ++i) hand.push_back({1.0 - 0.1 * static_cast<double>(i), rel[i] != 0, i});
  const double hand_ap = eval::average_precision(hand, eval::RecallConvention::kR11);
  const bool hand_ok = std::abs(hand_ap - 0.840909) < 5e-7 &&
                       eval::average_precision_exact(hand, eval::RecallConvention::kR11) == Rational(37, 44);
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = knn_bad == 0 && radius_bad == 0 && fps_bad == 0 && ap_bad == 0 && hand_ok && secs < 60.0;
  o.detail = "1000 instances each: kNN mismatches " + std::to_string(knn_bad) + ", radius " +
             std::to_string(radius_bad) + ", FPS greedy violations " + std::to_string(fps_bad) +
             ", AP " + std::to_string(ap_bad) + "; AP([1,0,1,1], R11) = " + fmt("%.6f", hand_ap) +
             ", " + fmt("%.1f", secs) + " s";
  return o;
}

// ------------------------------------------------------------- 4, 5, 6

struct CliResult {
  int code;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  return {code, err.str()};
}

// (variant, class, bin, convention) -> ap, read from an eval CSV.
std::map<std::string, double> read_eval_csv(const fs::path& p) {
  std::map<std::string, double> cells;
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    if (f.size() != 6 || f[5] == "-") continue;
    cells[f[1] + "/" + f[2] + "/" + f[3]] = std::stod(f[5]);
  }
  return cells;
}

struct Experiment {
  std::vector<std::string> variants{"baseline", "deform", "deform_gate"};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  // [variant][seed] -> cells
  std::map<std::string, std::vector<std::map<std::string, double>>> cells;
  double seconds = 0.0;
  std::string error;
  fs::path checkpoints_seed1;
  std::vector<std::string> base_args;
  std::size_t keypoints = 512;
};

Experiment run_experiment(const fs::path& work, const std::string& config) {
  Experiment e;
  const auto t0 = Clock::now();
  const fs::path data = work / "data";
  e.base_args = {"--config", config, "--set", "paths.data=" + data.string()};
  auto with = [&](std::vector<std::string> head, std::vector<std::string> tail) {
    head.insert(head.begin() + 1, e.base_args.begin(), e.base_args.end());
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
  };
  if (const auto r = cli(with({"gen"}, {})); r.code != 0) {
    e.error = "gen failed: " + r.err;
    return e;
  }
  for (const auto& v : e.variants) {
    std::vector<std::string> flags;
    if (v != "baseline") flags.push_back("--deform");
    if (v == "deform_gate") flags.push_back("--gate");
    for (std::uint64_t s : e.seeds) {
      const fs::path ckpt = work / ("ckpt_s" + std::to_string(s));
      const fs::path rep = work / ("reports_s" + std::to_string(s));
      if (s == 1) e.checkpoints_seed1 = ckpt;
      std::vector<std::string> tail = flags;
      tail.insert(tail.end(), {"--seed", std::to_string(s), "--set",
                               "paths.checkpoints=" + ckpt.string(), "--set",
                               "paths.reports=" + rep.string()});
      const auto t1 = Clock::now();
      if (const auto r = cli(with({"train"}, tail)); r.code != 0) {
        e.error = "train " + v + " failed: " + r.err;
        return e;
      }
      if (const auto r = cli(with({"eval"}, tail)); r.code != 0) {
        e.error = "eval " + v + " failed: " + r.err;
        return e;
      }
      e.cells[v].push_back(read_eval_csv(rep / ("eval_" + v + "_k" + std::to_string(e.keypoints) + ".csv")));
      std::cout << "  trained+evaluated " << v << " seed " << s << " in "
                << fmt("%.1f", seconds_since(t1)) << " s" << std::endl;
    }
  }
  e.seconds = seconds_since(t0);
  return e;
}

double cell(const Experiment& e, const std::string& v, std::size_t seed_idx, const std::string& key) {
  const auto& m = e.cells.at(v).at(seed_idx);
  const auto it = m.find(key);
  return it == m.end() ? std::nan("") : it->second;
}

double mean_cell(const Experiment& e, const std::string& v, const std::string& key) {
  double s = 0.0;
  for (std::size_t i = 0; i < e.seeds.size(); ++i) s += cell(e, v, i, key);
  return s / static_cast<double>(e.seeds.size());
}

Outcome ablation_direction(const Experiment& e) {
  Outcome o;
  std::ostringstream why;
  for (const std::string cls : {"PedestrianLike", "CyclistLike"}) {
    const std::string key = cls + "/all/R40";
    const double b = mean_cell(e, "baseline", key), d = mean_cell(e, "deform", key),
                 g = mean_cell(e, "deform_gate", key);
    int improved = 0;
    for (std::size_t i = 0; i < e.seeds.size(); ++i) {
      improved += cell(e, "deform_gate", i, key) > cell(e, "baseline", i, key);
    }
    const bool order = b < d && d <= g;
    const bool margin = (g - b) * 100.0 >= 2.0;
    const bool seeds = improved >= 4;
    o.pass = o.pass && order && margin && seeds;
    why << cls << " R40 baseline " << fmt("%.1f", 100 * b) << " < deform " << fmt("%.1f", 100 * d)
        << " <= full " << fmt("%.1f", 100 * g) << " (" << (order ? "ok" : "VIOLATED")
        << ", +" << fmt("%.1f", 100 * (g - b)) << " pts, full > baseline in " << improved
        << "/5 seeds); ";
  }
  o.pass = o.pass && e.seconds < 1800.0;
  why << "experiment " << fmt("%.0f", e.seconds) << " s";
  o.detail = why.str();
  return o;
}

Outcome distance_bins(const Experiment& e) {
  const std::string near = "CyclistLike/0-30m/R40", far = "CyclistLike/30-50m/R40";
  const double adv_near = mean_cell(e, "deform_gate", near) - mean_cell(e, "baseline", near);
  const double adv_far = mean_cell(e, "deform_gate", far) - mean_cell(e, "baseline", far);
  Outcome o;
  o.pass = std::isfinite(adv_far) && std::isfinite(adv_near) && adv_far >= adv_near;
  o.detail = "CyclistLike full-vs-baseline R40 advantage: 30-50m " + fmt("%+.1f", 100 * adv_far) +
             " pts vs 0-30m " + fmt("%+.1f", 100 * adv_near) + " pts (5-seed means)";
  return o;
}

Outcome keypoint_sweep(const Experiment& e, const fs::path& work) {
  Outcome o;
  std::ostringstream why;
  for (const std::string cls : {"CarLike", "PedestrianLike", "CyclistLike"}) {
    const std::string key = cls + "/all/R40";
    const double b = mean_cell(e, "baseline", key), g = mean_cell(e, "deform_gate", key);
    o.pass = o.pass && g >= b;
    why << cls << " @" << e.keypoints << " full " << fmt("%.1f", 100 * g) << " vs baseline "
        << fmt("%.1f", 100 * b) << "; ";
  }
  const fs::path rep = work / "sweep";
  std::vector<std::string> args{"sweep"};
  args.insert(args.end(), e.base_args.begin(), e.base_args.end());
  args.insert(args.end(), {"--seed", "1", "--set", "paths.checkpoints=" + e.checkpoints_seed1.string(),
                           "--set", "paths.reports=" + rep.string(), "--set",
                           "sweep.counts=" + std::to_string(e.keypoints), "--set",
                           "sweep.variants=baseline,deform,deform_gate"});
  const auto r1 = cli(args);
  const auto first = r1.code == 0 ? read_file_bytes(rep / "sweep.csv") : std::vector<std::uint8_t>{};
  const auto r2 = cli(args);
  const auto second = r2.code == 0 ? read_file_bytes(rep / "sweep.csv") : std::vector<std::uint8_t>{};
  const bool identical = r1.code == 0 && r2.code == 0 && first == second && !first.empty();

  // The sweep must agree with the eval report of the same checkpoint.
  bool consistent = identical;
  if (identical) {
    std::ifstream in(rep / "sweep.csv");
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      std::vector<std::string> f;
      std::stringstream ss(line);
      std::string item;
      while (std::getline(ss, item, ',')) f.push_back(item);
      if (f.size() != 4 || f[3] == "-") continue;
      const double want = cell(e, f[0], 0, f[2] + "/all/R40");
      consistent = consistent && std::abs(std::stod(f[3]) - want) < 5e-7;
    }
  }
  o.pass = o.pass && identical && consistent;
  why << "sweep CSV " << (identical ? "byte-identical on regeneration" : "NOT reproducible")
      << ", matches eval " << (consistent ? "yes" : "no");
  o.detail = why.str();
  return o;
}

// ------------------------------------------------------------------ 7

Outcome reproducibility(const fs::path& work, const std::string& config) {
  const auto t0 = Clock::now();
  std::array<std::vector<std::vector<std::uint8_t>>, 2> runs;
  std::string error;
  for (int run = 0; run < 2; ++run) {
    const fs::path dir = work / ("repro_" + std::to_string(run));
    fs::remove_all(dir);
    const std::vector<std::string> base{
        "--config",      config,
        "--set",         "gen.n_scenes=30",
        "--set",         "train.epochs=2",
        "--set",         "paths.data=" + (dir / "data").string(),
        "--set",         "paths.checkpoints=" + (dir / "ckpt").string(),
        "--set",         "paths.reports=" + (dir / "rep").string()};
    for (const std::string cmd : {"gen", "train", "eval"}) {
      std::vector<std::string> args{cmd};
      args.insert(args.end(), base.begin(), base.end());
      if (cmd != "gen") args.insert(args.end(), {"--deform", "--gate", "--seed", "9"});
      if (const auto r = cli(args); r.code != 0) error += cmd + " failed: " + r.err;
    }
    if (!error.empty()) break;
    std::vector<fs::path> files;
    for (const auto& sub : {"data", "ckpt", "rep"}) {
      for (const auto& entry : fs::directory_iterator(dir / sub)) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) runs[run].push_back(read_file_bytes(f));
  }
  Outcome o;
  o.pass = error.empty() && !runs[0].empty() && runs[0] == runs[1];
  o.detail = error.empty() ? std::to_string(runs[0].size()) +
                                 " files (scenes, manifest, checkpoint, loss log, run record, report) " +
                                 (runs[0] == runs[1] ? "byte-identical" : "DIFFER") +
                                 " across two runs, " + fmt("%.1f", seconds_since(t0)) + " s"
                           : error;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  std::string config = KPDEFORM_ACCEPTANCE_CONFIG;
  fs::path work = fs::current_path() / "acceptance_work";
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--only") {
      std::stringstream ss(argv[i + 1]);
      std::string item;
      while (std::getline(ss, item, ',')) only.insert(std::stoi(item));
    } else if (flag == "--config") {
      config = argv[i + 1];
    } else if (flag == "--work") {
      work = argv[i + 1];
    }
  }
  auto wanted = [&](int c) { return only.empty() || only.count(c) != 0; };
  fs::remove_all(work);
  fs::create_directories(work);

  bool all = true;
  auto report = [&](int id, const char* name, const Outcome& o) {
    all = all && o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << name << "): "
              << o.detail << std::endl;
  };

  if (wanted(1)) report(1, "gradient fidelity", gradient_fidelity());
  if (wanted(2)) report(2, "structural invariants", structural_invariants());
  if (wanted(3)) report(3, "oracle equivalence", oracle_equivalence());
  if (wanted(4) || wanted(5) || wanted(6)) {
    const Experiment e = run_experiment(work / "experiment", config);
    if (!e.error.empty()) {
      for (int id : {4, 5, 6}) {
        if (wanted(id)) report(id, "experiment", {false, e.error});
      }
    } else {
      if (wanted(4)) report(4, "ablation direction", ablation_direction(e));
      if (wanted(5)) report(5, "distance-bin direction", distance_bins(e));
      if (wanted(6)) report(6, "keypoint-sweep direction", keypoint_sweep(e, work));
    }
  }
  if (wanted(7)) report(7, "reproducibility", reproducibility(work, config));
  return all ? 0 : 1;
}
