#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

namespace percolab {

// Union-find with path halving and union by size.
class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), 0u);
  }

  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }

  std::uint32_t component_size(std::uint32_t x) { return size_[find(x)]; }
  std::size_t count() const { return parent_.size(); }

  // Sizes of all components, unsorted.
  std::vector<std::uint32_t> component_sizes() {
    std::vector<std::uint32_t> out;
    for (std::uint32_t v = 0; v < parent_.size(); ++v)
      if (find(v) == v) out.push_back(size_[v]);
    return out;
  }

  // Dense component ids in [0, k); id order follows root vertex order.
  std::vector<std::uint32_t> component_ids(std::uint32_t* n_components = nullptr) {
    std::vector<std::uint32_t> id(parent_.size(), 0);
    std::uint32_t k = 0;
    for (std::uint32_t v = 0; v < parent_.size(); ++v)
      if (find(v) == v) id[v] = k++;
    for (std::uint32_t v = 0; v < parent_.size(); ++v) id[v] = id[find(v)];
    if (n_components) *n_components = k;
    return id;
  }

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> size_;
};

}  // namespace percolab
