#pragma once

#include <cstdint>
#include <vector>

namespace percolab {

// Open-addressing set of vertex ids for BFS visited tracking. The hot loops
// (cluster BFS, balls) touch it once per edge, so no std::map here.
class FlatSet {
 public:
  explicit FlatSet(std::size_t expected = 16) { rehash(capacity_for(expected)); }

  // returns true if inserted (was absent)
  bool insert(std::uint64_t key) {
    if (2 * (size_ + 1) > slots_.size()) rehash(slots_.size() * 2);
    std::size_t i = probe(key);
    if (used_[i]) return false;
    used_[i] = true;
    slots_[i] = key;
    keys_.push_back(key);
    ++size_;
    return true;
  }

  bool contains(std::uint64_t key) const { return used_[probe(key)]; }
  std::size_t size() const { return size_; }
  const std::vector<std::uint64_t>& keys() const { return keys_; }

  void clear() {
    std::fill(used_.begin(), used_.end(), false);
    keys_.clear();
    size_ = 0;
  }

 private:
  static std::size_t capacity_for(std::size_t expected) {
    std::size_t cap = 16;
    while (cap < 4 * expected) cap *= 2;
    return cap;
  }

  std::size_t probe(std::uint64_t key) const {
    std::uint64_t h = key * 0x9e3779b97f4a7c15ULL;
    h ^= h >> 29;
    std::size_t i = static_cast<std::size_t>(h) & (slots_.size() - 1);
    while (used_[i] && slots_[i] != key) i = (i + 1) & (slots_.size() - 1);
    return i;
  }

  void rehash(std::size_t cap) {
    std::vector<std::uint64_t> old_keys = std::move(keys_);
    slots_.assign(cap, 0);
    used_.assign(cap, false);
    keys_.clear();
    size_ = 0;
    for (auto k : old_keys) insert(k);
  }

  std::vector<std::uint64_t> slots_;
  std::vector<bool> used_;
  std::vector<std::uint64_t> keys_;
  std::size_t size_ = 0;
};

}  // namespace percolab
