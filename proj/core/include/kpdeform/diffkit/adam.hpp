#pragma once

#include "kpdeform/diffkit/param.hpp"

namespace kpd::diffkit {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam over every parameter in the store; zeroes grads after.
void adam_step(ParamStore& store, const AdamConfig& config);

}  // namespace kpd::diffkit
