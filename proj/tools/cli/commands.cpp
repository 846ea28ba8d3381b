#include "commands.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "kpdeform/core/bytes.hpp"
#include "kpdeform/core/error.hpp"
#include "kpdeform/deformnet/gradcheck_suite.hpp"
#include "kpdeform/deformnet/params.hpp"
#include "kpdeform/deformnet/trainer.hpp"
#include "kpdeform/diffkit/checkpoint.hpp"
#include "kpdeform/eval/report.hpp"
#include "kpdeform/eval/sweep.hpp"
#include "kpdeform/synth/dataset.hpp"
#include "run_config.hpp"

namespace kpd::cli {
namespace fs = std::filesystem;

namespace {

// Reported as exit code 3.
struct MissingInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> sets;

  bool deform = false;
  bool gate = false;
  std::optional<std::size_t> keypoints;
  std::string sampler;
  std::string checkpoint;
  std::optional<std::size_t> scenes;
  bool train_missing = false;
  std::string corrupt;
  std::optional<std::size_t> gradcheck_seeds;
};

RunConfig resolve(const Options& o) {
  RunConfig c = o.config_path.empty() ? RunConfig{} : load_run_config(o.config_path);
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw Error(Errc::kConfig, "--set expects key=value, got " + s);
    apply_setting(c, s.substr(0, eq), s.substr(eq + 1));
  }
  if (o.deform) c.ablation.use_deform = true;
  if (o.gate) c.ablation.use_gate = true;
  if (o.keypoints) c.train.keypoints = *o.keypoints;
  if (!o.sampler.empty()) apply_setting(c, "train.sampler", o.sampler);
  if (o.scenes) c.n_scenes = *o.scenes;
  if (o.gradcheck_seeds) c.gradcheck_seeds = *o.gradcheck_seeds;
  if (!o.corrupt.empty()) c.gradcheck_corrupt_op = o.corrupt;
  return c;
}

void require_dataset(const fs::path& dir) {
  if (!fs::exists(dir / synth::kManifestName)) {
    throw MissingInput("no dataset at " + dir.string() + " (run `kpdeform gen --out " +
                       dir.string() + "` first)");
  }
}

std::vector<Scene> load_scenes(const fs::path& dir, const std::string& split) {
  require_dataset(dir);
  auto scenes = synth::load_split(dir, split);
  if (scenes.empty()) throw MissingInput("dataset at " + dir.string() + " has no " + split + " scenes");
  return scenes;
}

std::string loss_csv(const std::vector<double>& losses) {
  std::ostringstream s;
  s << "epoch,loss\n";
  for (std::size_t e = 0; e < losses.size(); ++e) {
    s << e << ',' << eval::format_fixed6(losses[e]) << '\n';
  }
  return s.str();
}

fs::path train_one(const RunConfig& c, const deformnet::Ablation& ab, std::size_t keypoints,
                   const std::vector<Scene>& scenes, std::ostream& out) {
  deformnet::TrainConfig tc = c.train;
  tc.keypoints = keypoints;
  const std::string variant = deformnet::variant_name(ab);
  auto result = deformnet::train_model(scenes, c.model, ab, tc, [&](std::size_t e, double l) {
    out << variant << " k=" << keypoints << " epoch " << e << " loss " << eval::format_fixed6(l)
        << '\n';
  });
  fs::create_directories(c.checkpoint_dir);
  const fs::path ckpt = eval::checkpoint_path(c.checkpoint_dir, variant, keypoints);
  diffkit::save_checkpoint(ckpt, result.params);
  fs::path log = ckpt;
  log.replace_extension();
  log += "_loss.csv";
  write_text_atomic(log, loss_csv(result.epoch_loss));
  // Which sampler and schedule produced the checkpoint; paths are left out so
  // the record is identical wherever the run happens.
  fs::path record = ckpt;
  record.replace_extension();
  record += "_run.cfg";
  std::ostringstream r;
  r << "variant=" << variant << "\ntrain.keypoints=" << keypoints
    << "\ntrain.sampler=" << spatial::sampler_name(tc.sampler) << "\ntrain.seed=" << tc.seed
    << "\ntrain.epochs=" << tc.epochs << "\ntrain.lr=" << eval::format_fixed6(tc.lr)
    << "\ntrain.batch_scenes=" << tc.batch_scenes << '\n';
  write_text_atomic(record, r.str());
  return ckpt;
}

int cmd_gen(const RunConfig& c, std::ostream& out) {
  const auto rows = synth::generate_dataset(c.gen, c.n_scenes, c.gen.seed, c.data_dir);
  out << "wrote " << rows.size() << " scenes to " << c.data_dir.string() << '\n';
  return kExitOk;
}

int cmd_train(const RunConfig& c, std::ostream& out) {
  const auto scenes = load_scenes(c.data_dir, "train");
  const fs::path ckpt = train_one(c, c.ablation, c.train.keypoints, scenes, out);
  out << "wrote " << ckpt.string() << '\n';
  return kExitOk;
}

int cmd_eval(const RunConfig& c, const Options& o, std::ostream& out) {
  fs::path ckpt = o.checkpoint.empty()
                      ? eval::checkpoint_path(c.checkpoint_dir, deformnet::variant_name(c.ablation),
                                              c.train.keypoints)
                      : fs::path(o.checkpoint);
  if (!fs::exists(ckpt)) throw MissingInput("no checkpoint at " + ckpt.string());
  const auto scenes = load_scenes(c.data_dir, c.eval_split);
  const auto params = diffkit::load_checkpoint(ckpt);
  const auto ab = deformnet::infer_ablation(params);
  deformnet::check_model_params(params, c.model, ab);
  const auto report = eval::evaluate_model(scenes, params, c.model, ab, c.train.keypoints,
                                           c.train.sampler, c.train.seed);
  fs::create_directories(c.report_dir);
  const fs::path path = c.report_dir / ("eval_" + report.variant + "_k" +
                                        std::to_string(c.train.keypoints) + ".csv");
  const eval::EvalReport reports[] = {report};
  write_text_atomic(path, eval::report_csv(reports));
  out << "wrote " << path.string() << '\n';
  return kExitOk;
}

int cmd_sweep(const RunConfig& c, const Options& o, std::ostream& out) {
  if (o.train_missing) {
    const auto train = load_scenes(c.data_dir, "train");
    for (const auto& v : c.sweep_variants) {
      deformnet::Ablation ab;
      deformnet::parse_variant(v, ab);
      for (std::size_t k : c.sweep_counts) {
        if (!fs::exists(eval::checkpoint_path(c.checkpoint_dir, v, k))) {
          train_one(c, ab, k, train, out);
        }
      }
    }
  }
  for (const auto& v : c.sweep_variants) {
    for (std::size_t k : c.sweep_counts) {
      const auto p = eval::checkpoint_path(c.checkpoint_dir, v, k);
      if (!fs::exists(p)) {
        throw MissingInput("no checkpoint at " + p.string() + " (train it or pass --train)");
      }
    }
  }
  const auto scenes = load_scenes(c.data_dir, c.eval_split);
  const auto rows = eval::keypoint_count_sweep(c.checkpoint_dir, c.sweep_variants, c.sweep_counts,
                                               scenes, c.model, c.train.sampler, c.train.seed);
  fs::create_directories(c.report_dir);
  const fs::path path = c.report_dir / "sweep.csv";
  write_text_atomic(path, eval::sweep_csv(rows));
  out << "wrote " << path.string() << '\n';
  return kExitOk;
}

int cmd_gradcheck(const RunConfig& c, std::ostream& out, std::ostream& err) {
  deformnet::GradCheckSuiteOptions opts;
  opts.seeds = c.gradcheck_seeds;
  opts.corrupt_op = c.gradcheck_corrupt_op;
  const auto result = deformnet::run_gradcheck_suite(opts);
  fs::create_directories(c.report_dir);
  const fs::path path = c.report_dir / "gradcheck.csv";
  write_text_atomic(path, deformnet::gradcheck_csv(result));
  std::size_t failed = 0;
  for (std::size_t i = 0; i < result.reports.size(); ++i) {
    const auto& r = result.reports[i];
    if (r.passed) continue;
    ++failed;
    err << "FAIL " << r.name << " seed " << result.seeds[i] << ": rel error " << r.max_rel_error
        << " in '" << r.worst_input << "'\n";
  }
  out << result.reports.size() - failed << "/" << result.reports.size() << " checks passed in "
      << result.seconds << " s; wrote " << path.string() << '\n';
  return failed == 0 ? kExitOk : kExitVerification;
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config_path, "key=value run configuration file");
  sub->add_option("--seed", o.seed, "seed (gen.seed for gen, train.seed otherwise)");
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--set", o.sets, "override one config key (key=value)");
}

void add_model_flags(CLI::App* sub, Options& o) {
  sub->add_flag("--deform", o.deform, "enable keypoint deformation");
  sub->add_flag("--gate", o.gate, "enable context gating");
  sub->add_option("--keypoints", o.keypoints, "keypoints per scene");
  sub->add_option("--sampler", o.sampler, "keypoint sampler (fps|random)");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Keypoint deformation and context gating on synthetic point clouds", "kpdeform"};
  app.require_subcommand(1);
  Options o;
  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
  auto* train = app.add_subcommand("train", "train one model variant");
  auto* evalc = app.add_subcommand("eval", "evaluate a checkpoint");
  auto* sweep = app.add_subcommand("sweep", "evaluate the keypoint-count sweep");
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient checks");
  for (auto* s : {gen, train, evalc, sweep, gradcheck}) add_common(s, o);
  gen->add_option("--scenes", o.scenes, "number of scenes");
  add_model_flags(train, o);
  add_model_flags(evalc, o);
  evalc->add_option("--checkpoint", o.checkpoint, "checkpoint file (default: from flags)");
  sweep->add_option("--sampler", o.sampler, "keypoint sampler (fps|random)");
  sweep->add_flag("--train", o.train_missing, "train checkpoints that do not exist yet");
  gradcheck->add_option("--seeds", o.gradcheck_seeds, "random seeds per check");
  gradcheck->add_option("--corrupt", o.corrupt, "scale one op's analytic gradient (test hook)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    RunConfig c = resolve(o);
    if (gen->parsed()) {
      if (o.seed) c.gen.seed = *o.seed;
      if (!o.out.empty()) c.data_dir = o.out;
    } else {
      if (o.seed) c.train.seed = *o.seed;
      if (!o.out.empty()) {
        (train->parsed() ? c.checkpoint_dir : c.report_dir) = o.out;
      }
    }
    c.validate();
    if (gen->parsed()) return cmd_gen(c, out);
    if (train->parsed()) return cmd_train(c, out);
    if (evalc->parsed()) return cmd_eval(c, o, out);
    if (sweep->parsed()) return cmd_sweep(c, o, out);
    return cmd_gradcheck(c, out, err);
  } catch (const MissingInput& e) {
    err << "error: " << e.what() << '\n';
    return kExitMissingInput;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    switch (e.code()) {
      case Errc::kConfig: return kExitConfig;
      case Errc::kMissingCheckpoint: return kExitMissingInput;
      default: return kExitFailure;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace kpd::cli
