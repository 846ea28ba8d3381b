#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "kpdeform/diffkit/tensor.hpp"

namespace kpd::diffkit {

struct Param {
  Tensor value;
  Tensor grad;
  Tensor m;
  Tensor v;
  std::int64_t step = 0;

  explicit Param(Tensor initial);
  void zero_grad() { grad.fill(0.0); }
};

enum class Init { kGlorotUniform, kZeros };

// Named parameters. Each parameter is initialized from its own stream,
// derived from (seed, name), so a parameter's initial value does not depend
// on which other parameters exist or on insertion order.
class ParamStore {
 public:
  explicit ParamStore(std::uint64_t seed = 0) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  // Glorot bounds use fan_in = shape.back(), fan_out = shape.front().
  Param& add(const std::string& name, std::vector<std::size_t> shape, Init init);
  Param& add_value(const std::string& name, Tensor value);

  bool contains(const std::string& name) const { return params_.count(name) != 0; }
  Param& at(const std::string& name);
  const Param& at(const std::string& name) const;
  const Tensor& value(const std::string& name) const { return at(name).value; }

  std::map<std::string, Param>& params() { return params_; }
  const std::map<std::string, Param>& params() const { return params_; }
  std::vector<std::string> names() const;
  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;

  void zero_grad();

 private:
  std::uint64_t seed_;
  std::map<std::string, Param> params_;
};

}  // namespace kpd::diffkit
