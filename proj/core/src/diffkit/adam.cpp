#include "kpdeform/diffkit/adam.hpp"

#include <cmath>

namespace kpd::diffkit {

void adam_step(ParamStore& store, const AdamConfig& config) {
  for (auto& [name, p] : store.params()) {
    ++p.step;
    const double t = static_cast<double>(p.step);
    const double c1 = 1.0 - std::pow(config.beta1, t);
    const double c2 = 1.0 - std::pow(config.beta2, t);
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      p.m[i] = config.beta1 * p.m[i] + (1.0 - config.beta1) * g;
      p.v[i] = config.beta2 * p.v[i] + (1.0 - config.beta2) * g * g;
      const double m_hat = p.m[i] / c1;
      const double v_hat = p.v[i] / c2;
      p.value[i] -= config.lr * m_hat / (std::sqrt(v_hat) + config.eps);
    }
    p.zero_grad();
  }
}

}  // namespace kpd::diffkit
