#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace kpd::eval {

enum class RecallConvention {
  kR11,  // recall levels 0, 0.1, ..., 1.0
  kR40,  // recall levels 1/40, 2/40, ..., 1
};

std::string_view convention_name(RecallConvention c) noexcept;

struct RankedItem {
  double score = 0.0;
  bool relevant = false;
  std::size_t index = 0;  // tie-break: equal scores rank lower index first
};

// Interpolated AP: mean over the convention's recall levels r of the highest
// precision reached at any cutoff with recall >= r. Items are ranked by
// descending score. Throws kNoPositives if nothing is relevant.
double average_precision(std::span<const RankedItem> items, RecallConvention convention);

using Rational = boost::multiprecision::cpp_rational;

// Same quantity in exact rational arithmetic.
Rational average_precision_exact(std::span<const RankedItem> items, RecallConvention convention);

// Indices of `items` in ranking order.
std::vector<std::size_t> ranking_order(std::span<const RankedItem> items);

}  // namespace kpd::eval
