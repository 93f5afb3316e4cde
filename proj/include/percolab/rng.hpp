#pragma once

#include <cstdint>
#include <cmath>

// Counter-based RNG. Every random quantity in the library is a pure
// function of (seed, stream, counter); nothing is ever stored. This is
// what makes the simultaneous coupling exact: percolation at two
// different p values consults the same edge uniform, and a rerun with
// the same seed reproduces every draw bit-for-bit.

namespace percolab::rng {

// Stream tags keep independent uses of the same seed decorrelated.
enum Stream : std::uint64_t {
  kEdges = 1,
  kPairUniforms = 2,
  kClocks = 3,
  kBrownian = 4,
  kErEdges = 5,
  kSampling = 6,
  kPermutation = 7,
  kGeneric = 8,
};

inline std::uint64_t fmix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

// Keyed hash: three finalizer rounds over (seed, stream, counter).
inline std::uint64_t hash(std::uint64_t seed, std::uint64_t stream,
                          std::uint64_t counter) {
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  x = fmix64(x);
  x += 0xd1342543de82ef95ULL * (counter + 1);
  x = fmix64(x);
  x ^= counter;
  return fmix64(x);
}

// Derive a sub-seed; used to give replicate i its own independent world.
inline std::uint64_t derive(std::uint64_t seed, std::uint64_t stream,
                            std::uint64_t index) {
  return hash(seed, stream, index);
}

inline double to_unit(std::uint64_t x) {
  return static_cast<double>(x >> 11) * 0x1.0p-53;  // [0,1)
}

inline double to_unit_open(std::uint64_t x) {
  return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;  // (0,1)
}

inline double uniform(std::uint64_t seed, std::uint64_t stream,
                      std::uint64_t counter) {
  return to_unit(hash(seed, stream, counter));
}

// Box-Muller from two keyed uniforms; each index is an independent N(0,1).
inline double normal(std::uint64_t seed, std::uint64_t stream,
                     std::uint64_t counter) {
  const double u1 = to_unit_open(hash(seed, stream, 2 * counter));
  const double u2 = to_unit(hash(seed, stream, 2 * counter + 1));
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(6.283185307179586476925286766559 * u2);
}

inline double exponential(std::uint64_t seed, std::uint64_t stream,
                          std::uint64_t counter, double rate) {
  return -std::log(to_unit_open(hash(seed, stream, counter))) / rate;
}

// Sequential view over a stream for algorithms that consume a variable
// number of draws (skip sampling, shuffles).
class Sequence {
 public:
  Sequence(std::uint64_t seed, std::uint64_t stream)
      : seed_(seed), stream_(stream) {}

  std::uint64_t next_u64() { return hash(seed_, stream_, counter_++); }
  double next_unit() { return to_unit(next_u64()); }
  double next_unit_open() { return to_unit_open(next_u64()); }

  // Uniform integer in [0, n), n > 0. Modulo bias is < 2^-53 for the n
  // used here (permutations of a few thousand items).
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(next_unit() * static_cast<double>(n)) %
           n;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

}  // namespace percolab::rng
