#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kpdeform/diffkit/grad_check.hpp"

namespace kpd::deformnet {

struct GradCheckSuiteOptions {
  std::size_t seeds = 20;
  std::uint64_t base_seed = 1;
  double eps = 1e-6;
  double primitive_tolerance = 1e-5;
  double end_to_end_tolerance = 1e-4;
  // Verification hook: scale the analytic gradient of this op's first input
  // by 1.1 so the check must fail.
  std::string corrupt_op;
};

struct GradCheckSuiteResult {
  std::vector<diffkit::GradCheckReport> reports;  // one per (op, seed)
  std::vector<std::uint64_t> seeds;               // parallel to reports
  double seconds = 0.0;
  bool passed = false;
};

// Operation names in check order; "end_to_end" is last.
const std::vector<std::string>& gradcheck_ops();

// Runs one op on random inputs drawn from `seed`. Inputs are drawn away from
// the kinks of relu and max.
diffkit::GradCheckReport run_gradcheck(const std::string& op, std::uint64_t seed,
                                       const GradCheckSuiteOptions& options = {});

GradCheckSuiteResult run_gradcheck_suite(const GradCheckSuiteOptions& options = {});

// Header: op,seed,checked,max_rel_error,worst_input,passed
std::string gradcheck_csv(const GradCheckSuiteResult& result);

}  // namespace kpd::deformnet
