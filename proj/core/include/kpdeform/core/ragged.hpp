#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace kpd {

// Compressed list-of-lists: row r occupies indices[offsets[r], offsets[r+1]).
struct Ragged {
  std::vector<std::size_t> offsets{0};
  std::vector<std::size_t> indices;

  std::size_t size() const { return offsets.size() - 1; }
  std::size_t total() const { return indices.size(); }

  std::span<const std::size_t> operator[](std::size_t row) const {
    return {indices.data() + offsets[row], offsets[row + 1] - offsets[row]};
  }

  void push_row(std::span<const std::size_t> row) {
    indices.insert(indices.end(), row.begin(), row.end());
    offsets.push_back(indices.size());
  }

  static Ragged from_lists(const std::vector<std::vector<std::size_t>>& lists) {
    Ragged r;
    for (const auto& l : lists) r.push_row(l);
    return r;
  }

  friend bool operator==(const Ragged&, const Ragged&) = default;
};

}  // namespace kpd
