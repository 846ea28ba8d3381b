#include "kpdeform/diffkit/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kpdeform/core/error.hpp"

namespace kpd::diffkit {
namespace {

std::vector<std::size_t> out_shape(const Tensor& input, std::size_t cols) {
  if (input.rank() == 2) return {input.rows(), cols};
  return {cols};
}

void check_linear(const Tensor& input, const Tensor& weight, const Tensor* bias) {
  if (weight.rank() != 2 || (input.rank() != 1 && input.rank() != 2) ||
      input.cols() != weight.cols()) {
    throw Error(Errc::kShapeMismatch,
                "linear: input " + input.shape_string() + " vs weight " + weight.shape_string());
  }
  if (bias && (bias->rank() != 1 || bias->size() != weight.rows())) {
    throw Error(Errc::kShapeMismatch,
                "linear: bias " + bias->shape_string() + " vs weight " + weight.shape_string());
  }
}

}  // namespace

Tensor linear(const Tensor& input, const Tensor& weight, const Tensor* bias) {
  check_linear(input, weight, bias);
  const std::size_t n = input.rows(), d_in = weight.cols(), d_out = weight.rows();
  Tensor out(out_shape(input, d_out));
  const double* x = input.data();
  const double* w = weight.data();
  double* y = out.data();
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = x + i * d_in;
    for (std::size_t o = 0; o < d_out; ++o) {
      const double* wo = w + o * d_in;
      double acc = bias ? (*bias)[o] : 0.0;
      for (std::size_t c = 0; c < d_in; ++c) acc += wo[c] * xi[c];
      y[i * d_out + o] = acc;
    }
  }
  require_finite(out, "linear");
  return out;
}

LinearGrads linear_backward(const Tensor& grad_out, const Tensor& input, const Tensor& weight,
                            bool has_bias) {
  check_linear(input, weight, nullptr);
  const std::size_t n = input.rows(), d_in = weight.cols(), d_out = weight.rows();
  if (grad_out.size() != n * d_out) {
    throw Error(Errc::kShapeMismatch, "linear_backward: grad " + grad_out.shape_string());
  }
  LinearGrads g{Tensor(input.shape()), Tensor(weight.shape()), std::nullopt};
  if (has_bias) g.bias = Tensor({d_out});
  const double* go = grad_out.data();
  const double* x = input.data();
  const double* w = weight.data();
  double* gx = g.input.data();
  double* gw = g.weight.data();
  for (std::size_t i = 0; i < n; ++i) {
    const double* goi = go + i * d_out;
    const double* xi = x + i * d_in;
    double* gxi = gx + i * d_in;
    for (std::size_t o = 0; o < d_out; ++o) {
      const double d = goi[o];
      if (d == 0.0) continue;
      const double* wo = w + o * d_in;
      double* gwo = gw + o * d_in;
      for (std::size_t c = 0; c < d_in; ++c) {
        gxi[c] += d * wo[c];
        gwo[c] += d * xi[c];
      }
      if (has_bias) (*g.bias)[o] += d;
    }
  }
  return g;
}

std::string_view activation_name(Activation kind) noexcept {
  switch (kind) {
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
    case Activation::kSigmoid: return "sigmoid";
  }
  return "unknown";
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor activate(Activation kind, const Tensor& input) {
  Tensor out(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) {
    const double x = input[i];
    switch (kind) {
      case Activation::kRelu: out[i] = x > 0.0 ? x : 0.0; break;
      case Activation::kTanh: out[i] = std::tanh(x); break;
      case Activation::kSigmoid: out[i] = sigmoid(x); break;
    }
  }
  require_finite(out, "activate");
  return out;
}

Tensor activate_backward(Activation kind, const Tensor& grad_out, const Tensor& input,
                         const Tensor& output) {
  require_same_shape(grad_out, input, "activate_backward");
  Tensor g(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) {
    switch (kind) {
      case Activation::kRelu: g[i] = input[i] > 0.0 ? grad_out[i] : 0.0; break;
      case Activation::kTanh: g[i] = grad_out[i] * (1.0 - output[i] * output[i]); break;
      case Activation::kSigmoid: g[i] = grad_out[i] * output[i] * (1.0 - output[i]); break;
    }
  }
  return g;
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "hadamard");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  require_finite(out, "hadamard");
  return out;
}

HadamardGrads hadamard_backward(const Tensor& grad_out, const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "hadamard_backward");
  require_same_shape(grad_out, a, "hadamard_backward");
  HadamardGrads g{Tensor(a.shape()), Tensor(b.shape())};
  for (std::size_t i = 0; i < a.size(); ++i) {
    g.a[i] = grad_out[i] * b[i];
    g.b[i] = grad_out[i] * a[i];
  }
  return g;
}

PoolResult pool_over_set(Pool kind, const Ragged& groups, const Tensor& features,
                         EmptyGroupPolicy empty) {
  const std::size_t n = features.rows(), d = features.cols();
  const std::size_t g = groups.size();
  PoolResult r{Tensor({g, d}), {}};
  if (kind == Pool::kMax) r.argmax.assign(g * d, kNoSource);
  std::vector<std::size_t> sorted;
  for (std::size_t gi = 0; gi < g; ++gi) {
    const auto members = groups[gi];
    if (members.empty()) {
      if (empty == EmptyGroupPolicy::kReject) {
        throw Error(Errc::kEmptyGroup, "group " + std::to_string(gi) + " is empty");
      }
      continue;  // zero row
    }
    sorted.assign(members.begin(), members.end());
    std::sort(sorted.begin(), sorted.end());
    if (sorted.back() >= n) {
      throw Error(Errc::kShapeMismatch, "group index " + std::to_string(sorted.back()) +
                                            " out of range for " + features.shape_string());
    }
    auto out = r.output.row(gi);
    if (kind == Pool::kMean) {
      for (std::size_t src : sorted) {
        const auto f = features.row(src);
        for (std::size_t c = 0; c < d; ++c) out[c] += f[c];
      }
      const double inv = 1.0 / static_cast<double>(sorted.size());
      for (std::size_t c = 0; c < d; ++c) out[c] *= inv;
    } else {
      for (std::size_t c = 0; c < d; ++c) {
        std::size_t best = sorted[0];
        double best_v = features.at(best, c);
        for (std::size_t k = 1; k < sorted.size(); ++k) {
          const double v = features.at(sorted[k], c);
          if (v > best_v) {
            best_v = v;
            best = sorted[k];
          }
        }
        out[c] = best_v;
        r.argmax[gi * d + c] = best;
      }
    }
  }
  require_finite(r.output, "pool_over_set");
  return r;
}

Tensor pool_over_set_backward(Pool kind, const Ragged& groups, const PoolResult& forward,
                              const Tensor& grad_out, std::size_t source_rows) {
  const std::size_t d = grad_out.cols();
  Tensor g({source_rows, d});
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const auto members = groups[gi];
    if (members.empty()) continue;
    const auto go = grad_out.row(gi);
    if (kind == Pool::kMean) {
      const double inv = 1.0 / static_cast<double>(members.size());
      for (std::size_t src : members) {
        auto row = g.row(src);
        for (std::size_t c = 0; c < d; ++c) row[c] += go[c] * inv;
      }
    } else {
      for (std::size_t c = 0; c < d; ++c) g.at(forward.argmax[gi * d + c], c) += go[c];
    }
  }
  return g;
}

}  // namespace kpd::diffkit
