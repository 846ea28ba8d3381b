#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "kpdeform/core/ragged.hpp"
#include "kpdeform/diffkit/tensor.hpp"

namespace kpd::diffkit {

// Primitive kernels with explicit backward passes. Forward functions are pure;
// backward functions take the upstream gradient plus whatever the forward
// needed and return gradients for every differentiable argument.

// out[i] = W * in[i] (+ b), in: [n x d_in], W: [d_out x d_in], b: [d_out].
Tensor linear(const Tensor& input, const Tensor& weight, const Tensor* bias = nullptr);

struct LinearGrads {
  Tensor input;
  Tensor weight;
  std::optional<Tensor> bias;
};
LinearGrads linear_backward(const Tensor& grad_out, const Tensor& input, const Tensor& weight,
                            bool has_bias);

enum class Activation { kRelu, kTanh, kSigmoid };

std::string_view activation_name(Activation kind) noexcept;

double sigmoid(double x);
Tensor activate(Activation kind, const Tensor& input);
// `output` is the forward result; relu uses it to recover the mask, with
// relu'(0) = 0.
Tensor activate_backward(Activation kind, const Tensor& grad_out, const Tensor& input,
                         const Tensor& output);

Tensor hadamard(const Tensor& a, const Tensor& b);
struct HadamardGrads {
  Tensor a;
  Tensor b;
};
HadamardGrads hadamard_backward(const Tensor& grad_out, const Tensor& a, const Tensor& b);

enum class Pool { kMean, kMax };

enum class EmptyGroupPolicy { kReject, kZeroFallback };

struct PoolResult {
  Tensor output;                    // [groups x d]
  std::vector<std::size_t> argmax;  // max only: [groups x d] source row, or npos for empty
};

inline constexpr std::size_t kNoSource = static_cast<std::size_t>(-1);

// Mean sums each group in ascending source-row order, so the result does not
// depend on the order of indices within a group. Max ties resolve to the
// lowest source row.
PoolResult pool_over_set(Pool kind, const Ragged& groups, const Tensor& features,
                         EmptyGroupPolicy empty = EmptyGroupPolicy::kReject);

Tensor pool_over_set_backward(Pool kind, const Ragged& groups, const PoolResult& forward,
                              const Tensor& grad_out, std::size_t source_rows);

}  // namespace kpd::diffkit
