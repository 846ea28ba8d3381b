#include "kpdeform/eval/average_precision.hpp"

#include <algorithm>
#include <numeric>

#include "kpdeform/core/error.hpp"

namespace kpd::eval {
namespace {

struct Levels {
  std::size_t first;  // numerator of the first level
  std::size_t last;   // numerator of the last level
  std::size_t denom;
};

Levels levels_of(RecallConvention c) {
  return c == RecallConvention::kR11 ? Levels{0, 10, 10} : Levels{1, 40, 40};
}

// Cumulative true-positive count after each rank, plus the positive total.
std::vector<std::size_t> cumulative_tp(std::span<const RankedItem> items, std::size_t& positives) {
  const auto order = ranking_order(items);
  std::vector<std::size_t> tp(order.size());
  std::size_t running = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (items[order[k]].relevant) ++running;
    tp[k] = running;
  }
  positives = running;
  if (positives == 0) throw Error(Errc::kNoPositives, "no relevant items to rank");
  return tp;
}

// Interpolated precision at each level, generic over the number type.
template <typename Number>
Number interpolated_sum(const std::vector<std::size_t>& tp, std::size_t positives,
                        const Levels& lv, std::size_t& count) {
  const std::size_t n = tp.size();
  std::vector<Number> suffix_max(n + 1, Number(0));
  for (std::size_t k = n; k-- > 0;) {
    Number p = Number(tp[k]) / Number(k + 1);
    suffix_max[k] = std::max(p, suffix_max[k + 1]);
  }
  Number sum(0);
  count = 0;
  std::size_t k = 0;
  for (std::size_t i = lv.first; i <= lv.last; ++i) {
    // first cutoff with tp / positives >= i / denom
    while (k < n && tp[k] * lv.denom < i * positives) ++k;
    sum += suffix_max[k];
    ++count;
  }
  return sum;
}

}  // namespace

std::string_view convention_name(RecallConvention c) noexcept {
  return c == RecallConvention::kR11 ? "R11" : "R40";
}

std::vector<std::size_t> ranking_order(std::span<const RankedItem> items) {
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (items[a].score != items[b].score) return items[a].score > items[b].score;
    return items[a].index < items[b].index;
  });
  return order;
}

double average_precision(std::span<const RankedItem> items, RecallConvention convention) {
  std::size_t positives = 0;
  const auto tp = cumulative_tp(items, positives);
  std::size_t count = 0;
  const double sum = interpolated_sum<double>(tp, positives, levels_of(convention), count);
  return sum / static_cast<double>(count);
}

Rational average_precision_exact(std::span<const RankedItem> items, RecallConvention convention) {
  std::size_t positives = 0;
  const auto tp = cumulative_tp(items, positives);
  std::size_t count = 0;
  const Rational sum = interpolated_sum<Rational>(tp, positives, levels_of(convention), count);
  return sum / Rational(count);
}

}  // namespace kpd::eval
