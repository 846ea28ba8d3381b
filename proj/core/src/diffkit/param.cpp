#include "kpdeform/diffkit/param.hpp"

#include <cmath>

#include "kpdeform/core/error.hpp"
#include "kpdeform/core/rng.hpp"

namespace kpd::diffkit {

Param::Param(Tensor initial)
    : value(std::move(initial)),
      grad(value.shape()),
      m(value.shape()),
      v(value.shape()) {}

Param& ParamStore::add(const std::string& name, std::vector<std::size_t> shape, Init init) {
  Tensor t(shape);
  if (init == Init::kGlorotUniform && !shape.empty()) {
    const double fan_in = static_cast<double>(shape.back());
    const double fan_out = static_cast<double>(shape.front());
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    Rng rng(mix_seed(seed_, fnv1a(name)));
    for (double& x : t.values()) x = rng.uniform(-bound, bound);
  }
  return add_value(name, std::move(t));
}

Param& ParamStore::add_value(const std::string& name, Tensor value) {
  if (contains(name)) throw Error(Errc::kInvariantViolation, "duplicate parameter " + name);
  return params_.emplace(name, Param(std::move(value))).first->second;
}

Param& ParamStore::at(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw Error(Errc::kInvariantViolation, "no parameter named " + name);
  return it->second;
}

const Param& ParamStore::at(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw Error(Errc::kInvariantViolation, "no parameter named " + name);
  return it->second;
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : params_) out.push_back(name);
  return out;
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [_, p] : params_) n += p.value.size();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& [_, p] : params_) p.zero_grad();
}

}  // namespace kpd::diffkit
