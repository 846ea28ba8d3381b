#include "kpdeform/diffkit/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "kpdeform/core/error.hpp"
#include "kpdeform/core/rng.hpp"

namespace kpd::diffkit {
namespace {

double dot(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void finish(GradCheckReport& report, double tolerance) {
  report.max_rel_error = 0.0;
  for (const auto& e : report.per_input) {
    if (e.rel_error >= report.max_rel_error) {
      report.max_rel_error = e.rel_error;
      report.worst_input = e.name;
    }
  }
  report.passed = std::isfinite(report.max_rel_error) && report.max_rel_error <= tolerance;
}

}  // namespace

double relative_error(const std::vector<double>& analytic, const std::vector<double>& numeric) {
  double diff = 0.0, na = 0.0, nn = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double d = analytic[i] - numeric[i];
    diff += d * d;
    na += analytic[i] * analytic[i];
    nn += numeric[i] * numeric[i];
  }
  diff = std::sqrt(diff);
  const double scale = std::max(std::sqrt(na), std::sqrt(nn));
  if (scale < 1e-10) return diff;
  return diff / scale;
}

GradCheckReport grad_check(const std::string& name, const ForwardFn& forward,
                           const BackwardFn& backward, std::vector<CheckInput> inputs,
                           const GradCheckOptions& options) {
  const double guard = 10.0 * options.eps;
  for (const auto& in : inputs) {
    for (double x : in.value.values()) {
      for (double kink : in.kinks) {
        if (std::abs(x - kink) <= guard) {
          throw Error(Errc::kKinkProximity, name + ": input '" + in.name + "' value " +
                                                std::to_string(x) + " within 10*eps of kink " +
                                                std::to_string(kink));
        }
      }
    }
  }

  std::vector<Tensor> values;
  values.reserve(inputs.size());
  for (auto& in : inputs) values.push_back(in.value);

  const Tensor y = forward(values);
  Tensor projection(y.shape());
  Rng rng(mix_seed(options.seed, fnv1a(name)));
  for (double& r : projection.values()) r = rng.uniform(-1.0, 1.0);

  const std::vector<Tensor> analytic = backward(values, projection);
  if (analytic.size() != values.size()) {
    throw Error(Errc::kShapeMismatch, name + ": backward returned wrong gradient count");
  }

  GradCheckReport report;
  report.name = name;
  for (std::size_t t = 0; t < values.size(); ++t) {
    require_same_shape(analytic[t], values[t], "grad_check");
    std::vector<double> numeric(values[t].size());
    for (std::size_t e = 0; e < values[t].size(); ++e) {
      const double saved = values[t][e];
      values[t][e] = saved + options.eps;
      const double up = dot(projection, forward(values));
      values[t][e] = saved - options.eps;
      const double down = dot(projection, forward(values));
      values[t][e] = saved;
      numeric[e] = (up - down) / (2.0 * options.eps);
    }
    report.checked += numeric.size();
    const auto a = analytic[t].values();
    report.per_input.push_back(
        {inputs[t].name, relative_error(std::vector<double>(a.begin(), a.end()), numeric)});
  }
  finish(report, options.tolerance);
  return report;
}

GradCheckReport grad_check_store(const std::string& name, ParamStore& store,
                                 const std::function<double()>& loss,
                                 const std::function<void()>& backward,
                                 const GradCheckOptions& options) {
  store.zero_grad();
  backward();
  GradCheckReport report;
  report.name = name;
  for (auto& [pname, p] : store.params()) {
    const auto a = p.grad.values();
    std::vector<double> analytic(a.begin(), a.end());
    std::vector<double> numeric(p.value.size());
    for (std::size_t e = 0; e < p.value.size(); ++e) {
      const double saved = p.value[e];
      p.value[e] = saved + options.eps;
      const double up = loss();
      p.value[e] = saved - options.eps;
      const double down = loss();
      p.value[e] = saved;
      numeric[e] = (up - down) / (2.0 * options.eps);
    }
    report.checked += numeric.size();
    report.per_input.push_back({pname, relative_error(analytic, numeric)});
  }
  store.zero_grad();
  finish(report, options.tolerance);
  return report;
}

}  // namespace kpd::diffkit
