#pragma once

#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

namespace losstopo::persistence {

// Disjoint sets with path halving. unite() attaches the second root under
// the first so callers decide which representative survives.
class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  // Makes `survivor`'s root the root of both sets.
  void attach(std::size_t survivor, std::size_t other) {
    const auto a = find(survivor), b = find(other);
    if (a != b) parent_[b] = a;
  }

  std::size_t size() const { return parent_.size(); }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace losstopo::persistence
