#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kpdeform/diffkit/param.hpp"
#include "kpdeform/diffkit/tensor.hpp"

namespace kpd::diffkit {

struct GradCheckOptions {
  double eps = 1e-6;
  double tolerance = 1e-5;
  std::uint64_t seed = 0;  // seeds the random output projection
};

struct InputError {
  std::string name;
  double rel_error = 0.0;
};

struct GradCheckReport {
  std::string name;
  double max_rel_error = 0.0;
  std::string worst_input;
  std::vector<InputError> per_input;
  std::size_t checked = 0;  // scalar entries perturbed
  bool passed = false;
};

struct CheckInput {
  std::string name;
  Tensor value;
  // Points where the op is not differentiable in this input (e.g. 0 for relu).
  std::vector<double> kinks = {};
};

using ForwardFn = std::function<Tensor(const std::vector<Tensor>&)>;
using BackwardFn =
    std::function<std::vector<Tensor>(const std::vector<Tensor>& inputs, const Tensor& grad_out)>;

// Compares backward(inputs, r) against central differences of <r, forward(x)>
// for a random projection r. Relative error per input is
// |analytic - numeric|_2 / max(|analytic|_2, |numeric|_2) (absolute when both
// norms vanish). Throws kKinkProximity if an input lies within 10*eps of a kink.
GradCheckReport grad_check(const std::string& name, const ForwardFn& forward,
                           const BackwardFn& backward, std::vector<CheckInput> inputs,
                           const GradCheckOptions& options = {});

// Same comparison for a scalar loss over every parameter of a store. `loss`
// evaluates with the store's current values; `backward` must leave d loss /
// d value in each Param::grad (the store's grads are zeroed before the call).
GradCheckReport grad_check_store(const std::string& name, ParamStore& store,
                                 const std::function<double()>& loss,
                                 const std::function<void()>& backward,
                                 const GradCheckOptions& options = {});

// Norm-based relative error used by both checkers.
double relative_error(const std::vector<double>& analytic, const std::vector<double>& numeric);

}  // namespace kpd::diffkit
