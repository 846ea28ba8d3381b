#include "kpdeform/deformnet/gradcheck_suite.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <sstream>

#include "kpdeform/core/error.hpp"
#include "kpdeform/core/rng.hpp"
#include "kpdeform/deformnet/model.hpp"
#include "kpdeform/deformnet/params.hpp"
#include "kpdeform/deformnet/stages.hpp"
#include "kpdeform/diffkit/ops.hpp"

namespace kpd::deformnet {

using diffkit::CheckInput;
using diffkit::GradCheckOptions;
using diffkit::GradCheckReport;

namespace {

constexpr double kKinkMargin = 1e-3;

Tensor random_tensor(Rng& rng, std::vector<std::size_t> shape, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.uniform(-scale, scale);
  return t;
}

// Values kept at least kKinkMargin away from zero.
Tensor away_from_zero(Rng& rng, std::vector<std::size_t> shape) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) {
    const double mag = rng.uniform(kKinkMargin, 1.0);
    v = rng.uniform() < 0.5 ? -mag : mag;
  }
  return t;
}

std::vector<Vec3> random_points(Rng& rng, std::size_t n, double extent) {
  std::vector<Vec3> p(n);
  for (auto& v : p) v = {rng.uniform(0, extent), rng.uniform(0, extent), rng.uniform(0, extent)};
  return p;
}

std::vector<Vec3> tensor_to_positions(const Tensor& t) {
  std::vector<Vec3> p(t.rows());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = {t.at(i, 0), t.at(i, 1), t.at(i, 2)};
  return p;
}

struct Case {
  diffkit::ForwardFn forward;
  diffkit::BackwardFn backward;
  std::vector<CheckInput> inputs;
  bool end_to_end = false;
};

ModelConfig tiny_config() {
  ModelConfig c;
  c.encoder = {1.0, 8};
  c.deform = {4, 6, 5, 0.5};
  c.sa = {0.9, 8, {6, 5}};
  c.gate = {5, 5};
  return c;
}

GradCheckReport end_to_end(std::uint64_t seed, const GradCheckSuiteOptions& options,
                           bool corrupt) {
  Rng rng(mix_seed(seed, 0x453245));
  const ModelConfig config = tiny_config();
  Scene scene;
  scene.scene_id = static_cast<std::uint32_t>(seed);
  for (const auto& v : random_points(rng, 30, 2.0)) {
    scene.cloud.push_back({v.x, v.y, v.z, rng.uniform()});
  }
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < 8; ++i) idx.push_back(i * 3);
  PreparedScene prepared = prepare_scene(scene, idx, config, mix_seed(seed, 1));
  for (auto& t : prepared.truth) t = static_cast<ClassId>(rng.index(kNumClasses));

  const Ablation ablation{};
  auto params = init_model_params(config, ablation, seed);
  // Nonzero biases so relu activations are not pinned at the origin.
  for (auto& [name, p] : params.params()) {
    if (p.value.rank() == 1) {
      for (double& v : p.value.values()) v = rng.uniform(-0.2, 0.2);
    }
  }
  auto loss = [&] {
    const auto fwd = forward(prepared, params, config, ablation);
    return softmax_cross_entropy(fwd.scores, prepared.truth, nullptr);
  };
  auto backward = [&] {
    const auto fwd = forward(prepared, params, config, ablation);
    loss_and_backward(fwd, prepared, params, config);
    if (corrupt) params.params().begin()->second.grad *= 1.1;
  };
  GradCheckOptions opts{options.eps, options.end_to_end_tolerance, seed};
  return diffkit::grad_check_store("end_to_end", params, loss, backward, opts);
}

Case make_case(const std::string& op, Rng& rng) {
  using namespace diffkit;
  Case c;
  if (op == "linear") {
    c.inputs = {{"input", random_tensor(rng, {5, 4})},
                {"weight", random_tensor(rng, {3, 4})},
                {"bias", random_tensor(rng, {3})}};
    c.forward = [](const std::vector<Tensor>& x) { return linear(x[0], x[1], &x[2]); };
    c.backward = [](const std::vector<Tensor>& x, const Tensor& g) {
      auto r = linear_backward(g, x[0], x[1], true);
      return std::vector<Tensor>{r.input, r.weight, *r.bias};
    };
    return c;
  }
  for (Activation kind : {Activation::kRelu, Activation::kTanh, Activation::kSigmoid}) {
    if (op != "activation." + std::string(activation_name(kind))) continue;
    const bool relu = kind == Activation::kRelu;
    c.inputs = {{"input", relu ? away_from_zero(rng, {4, 5}) : random_tensor(rng, {4, 5}, 3.0),
                 relu ? std::vector<double>{0.0} : std::vector<double>{}}};
    c.forward = [kind](const std::vector<Tensor>& x) { return activate(kind, x[0]); };
    c.backward = [kind](const std::vector<Tensor>& x, const Tensor& g) {
      return std::vector<Tensor>{activate_backward(kind, g, x[0], activate(kind, x[0]))};
    };
    return c;
  }
  if (op == "hadamard") {
    c.inputs = {{"a", random_tensor(rng, {4, 3})}, {"b", random_tensor(rng, {4, 3})}};
    c.forward = [](const std::vector<Tensor>& x) { return hadamard(x[0], x[1]); };
    c.backward = [](const std::vector<Tensor>& x, const Tensor& g) {
      auto r = hadamard_backward(g, x[0], x[1]);
      return std::vector<Tensor>{r.a, r.b};
    };
    return c;
  }
  if (op == "pool.mean" || op == "pool.max") {
    const Pool kind = op == "pool.mean" ? Pool::kMean : Pool::kMax;
    const std::size_t rows = 9, d = 3;
    std::vector<std::vector<std::size_t>> lists(4);
    for (std::size_t i = 0; i < rows; ++i) lists[rng.index(4)].push_back(i);
    for (auto& l : lists) {
      if (l.empty()) l.push_back(rng.index(rows));
    }
    const Ragged groups = Ragged::from_lists(lists);
    Tensor feats(std::vector<std::size_t>{rows, d});
    // Distinct values per column, spaced well beyond eps, so max is smooth.
    for (std::size_t col = 0; col < d; ++col) {
      std::vector<std::size_t> perm(rows);
      for (std::size_t i = 0; i < rows; ++i) perm[i] = i;
      for (std::size_t i = rows; i > 1; --i) std::swap(perm[i - 1], perm[rng.index(i)]);
      for (std::size_t i = 0; i < rows; ++i) {
        feats.at(i, col) = 0.1 * static_cast<double>(perm[i]) + rng.uniform(0.0, 0.05);
      }
    }
    c.inputs = {{"features", feats}};
    c.forward = [kind, groups](const std::vector<Tensor>& x) {
      return pool_over_set(kind, groups, x[0]).output;
    };
    c.backward = [kind, groups](const std::vector<Tensor>& x, const Tensor& g) {
      const auto fwd = pool_over_set(kind, groups, x[0]);
      return std::vector<Tensor>{pool_over_set_backward(kind, groups, fwd, g, x[0].rows())};
    };
    return c;
  }
  if (op == "encode_keypoints") {
    auto pts = random_points(rng, 40, 2.0);
    auto grid = std::make_shared<spatial::GridIndex>(pts, 1.0);
    auto intensity = std::make_shared<std::vector<double>>();
    for (std::size_t i = 0; i < pts.size(); ++i) intensity->push_back(rng.uniform());
    auto centers = std::make_shared<std::vector<Vec3>>(random_points(rng, 6, 2.0));
    const EncoderConfig cfg{1.0, 8};
    const std::uint64_t s = rng.next();
    c.inputs = {{"weight", random_tensor(rng, {5, 4})}, {"bias", random_tensor(rng, {5}, 0.3)}};
    auto run = [=](const std::vector<Tensor>& x) {
      return encode_keypoints({grid.get(), *intensity}, *centers, cfg, x[0], x[1], s);
    };
    c.forward = [run](const std::vector<Tensor>& x) { return run(x).features; };
    c.backward = [run](const std::vector<Tensor>& x, const Tensor& g) {
      auto r = encode_backward(run(x), g, x[0]);
      return std::vector<Tensor>{r.weight, r.bias};
    };
    return c;
  }
  if (op == "edge_offset_features") {
    const std::size_t n = 7, d_feat = 4, d_off = 5;
    auto positions = random_points(rng, n, 2.0);
    auto neighbors = std::make_shared<spatial::NeighborSet>(spatial::knn_excluding_self(positions, 3));
    c.inputs = {{"features", random_tensor(rng, {n, d_feat})},
                {"positions", positions_to_tensor(positions)},
                {"w_offset", random_tensor(rng, {d_off, d_feat + 3})}};
    c.forward = [neighbors](const std::vector<Tensor>& x) {
      return edge_offset_features(x[0], tensor_to_positions(x[1]), *neighbors, x[2]).offset;
    };
    c.backward = [neighbors, d_feat](const std::vector<Tensor>& x, const Tensor& g) {
      const auto fwd = edge_offset_features(x[0], tensor_to_positions(x[1]), *neighbors, x[2]);
      auto r = edge_offset_backward(fwd, g, x[2], d_feat);
      return std::vector<Tensor>{r.features, r.positions, r.w_offset};
    };
    return c;
  }
  if (op == "deform_positions") {
    const std::size_t n = 6, d_off = 4;
    const double delta = 0.7;
    c.inputs = {{"positions", positions_to_tensor(random_points(rng, n, 2.0))},
                {"offset", random_tensor(rng, {n, d_off})},
                {"w_align", random_tensor(rng, {3, d_off})}};
    c.forward = [delta](const std::vector<Tensor>& x) {
      return positions_to_tensor(deform_positions(tensor_to_positions(x[0]), x[1], x[2], delta).deformed);
    };
    c.backward = [delta](const std::vector<Tensor>& x, const Tensor& g) {
      const auto fwd = deform_positions(tensor_to_positions(x[0]), x[1], x[2], delta);
      auto r = deform_backward(fwd, g, x[1], x[2], delta);
      return std::vector<Tensor>{g, r.offset, r.w_align};
    };
    return c;
  }
  if (op == "set_abstraction") {
    auto pts = random_points(rng, 40, 2.0);
    auto grid = std::make_shared<spatial::GridIndex>(pts, 0.9);
    auto intensity = std::make_shared<std::vector<double>>();
    for (std::size_t i = 0; i < pts.size(); ++i) intensity->push_back(rng.uniform());
    const SAConfig cfg{0.9, 8, {5, 4}};
    const std::uint64_t s = rng.next();
    c.inputs = {{"centers", positions_to_tensor(random_points(rng, 5, 2.0))},
                {"l0.weight", random_tensor(rng, {5, 4})},
                {"l0.bias", random_tensor(rng, {5}, 0.3)},
                {"l1.weight", random_tensor(rng, {4, 5})},
                {"l1.bias", random_tensor(rng, {4}, 0.3)}};
    auto run = [=](const std::vector<Tensor>& x) {
      MlpWeights mlp{{x[1], x[3]}, {x[2], x[4]}};
      return set_abstraction({grid.get(), *intensity}, tensor_to_positions(x[0]), cfg, mlp, s);
    };
    c.forward = [run](const std::vector<Tensor>& x) { return run(x).features; };
    c.backward = [run](const std::vector<Tensor>& x, const Tensor& g) {
      MlpWeights mlp{{x[1], x[3]}, {x[2], x[4]}};
      auto r = set_abstraction_backward(run(x), g, mlp);
      return std::vector<Tensor>{r.centers, r.mlp.weights[0], r.mlp.biases[0], r.mlp.weights[1],
                                 r.mlp.biases[1]};
    };
    return c;
  }
  if (op == "context_gate") {
    c.inputs = {{"a", random_tensor(rng, {5, 4})},
                {"w_gate", random_tensor(rng, {3, 4})},
                {"b_gate", random_tensor(rng, {3})},
                {"w_fc", random_tensor(rng, {3, 4})}};
    c.forward = [](const std::vector<Tensor>& x) {
      return context_gate(x[0], x[1], x[2], x[3]).out;
    };
    c.backward = [](const std::vector<Tensor>& x, const Tensor& g) {
      const auto fwd = context_gate(x[0], x[1], x[2], x[3]);
      auto r = context_gate_backward(fwd, g, x[0], x[1], x[3]);
      return std::vector<Tensor>{r.input, r.w_gate, r.b_gate, r.w_fc};
    };
    return c;
  }
  if (op == "softmax_cross_entropy") {
    const std::size_t n = 6;
    auto truth = std::make_shared<std::vector<ClassId>>();
    for (std::size_t i = 0; i < n; ++i) truth->push_back(static_cast<ClassId>(rng.index(kNumClasses)));
    c.inputs = {{"scores", random_tensor(rng, {n, kNumClasses}, 3.0)}};
    c.forward = [truth](const std::vector<Tensor>& x) {
      return Tensor({1}, {softmax_cross_entropy(x[0], *truth, nullptr)});
    };
    c.backward = [truth](const std::vector<Tensor>& x, const Tensor& g) {
      Tensor grad;
      softmax_cross_entropy(x[0], *truth, &grad);
      grad *= g[0];
      return std::vector<Tensor>{grad};
    };
    return c;
  }
  throw Error(Errc::kConfig, "unknown gradcheck op '" + op + "'");
}

}  // namespace

const std::vector<std::string>& gradcheck_ops() {
  static const std::vector<std::string> ops{
      "linear",           "activation.relu",      "activation.tanh", "activation.sigmoid",
      "hadamard",         "pool.mean",            "pool.max",        "encode_keypoints",
      "edge_offset_features", "deform_positions", "set_abstraction", "context_gate",
      "softmax_cross_entropy", "end_to_end"};
  return ops;
}

GradCheckReport run_gradcheck(const std::string& op, std::uint64_t seed,
                              const GradCheckSuiteOptions& options) {
  const bool corrupt = !options.corrupt_op.empty() && options.corrupt_op == op;
  if (op == "end_to_end") return end_to_end(seed, options, corrupt);
  Rng rng(mix_seed(seed, fnv1a(op)));
  Case c = make_case(op, rng);
  if (corrupt) {
    auto inner = c.backward;
    c.backward = [inner](const std::vector<Tensor>& x, const Tensor& g) {
      auto grads = inner(x, g);
      grads.front() *= 1.1;
      return grads;
    };
  }
  GradCheckOptions opts{options.eps, options.primitive_tolerance, seed};
  return diffkit::grad_check(op, c.forward, c.backward, std::move(c.inputs), opts);
}

GradCheckSuiteResult run_gradcheck_suite(const GradCheckSuiteOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  GradCheckSuiteResult result;
  result.passed = true;
  for (const auto& op : gradcheck_ops()) {
    for (std::size_t s = 0; s < options.seeds; ++s) {
      const std::uint64_t seed = options.base_seed + s;
      result.reports.push_back(run_gradcheck(op, seed, options));
      result.seeds.push_back(seed);
      result.passed = result.passed && result.reports.back().passed;
    }
  }
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::string gradcheck_csv(const GradCheckSuiteResult& result) {
  std::ostringstream out;
  out << "op,seed,checked,max_rel_error,worst_input,passed\n";
  char buf[64];
  for (std::size_t i = 0; i < result.reports.size(); ++i) {
    const auto& r = result.reports[i];
    std::snprintf(buf, sizeof buf, "%.6e", r.max_rel_error);
    out << r.name << ',' << result.seeds[i] << ',' << r.checked << ',' << buf << ','
        << r.worst_input << ',' << (r.passed ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace kpd::deformnet
