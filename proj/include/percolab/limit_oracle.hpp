#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "percolab/rng.hpp"
#include "percolab/stats.hpp"
#include "percolab/union_find.hpp"

// Reference samplers for the limit objects: excursion lengths of
// W_t + lambda*t - t^2/2 reflected above its running minimum, the constant
// kappa(lambda) = E sum |gamma_i|^2, and an Erdos-Renyi cross-check.

namespace percolab::oracle {

struct ExcursionLengths {
  std::vector<double> lengths;     // weakly decreasing, in time units
  double sum_sq = 0.0;             // sum of lengths^2 over kept excursions
  std::uint64_t discarded = 0;     // excursions of fewer than 2 grid steps
  double horizon = 0.0;
  double step = 0.0;
};

struct ExcursionOptions {
  bool zero_noise = false;  // deterministic drift path, for oracle tests
};

// Materialized grid path W^lambda_{kh}, k = 1..T/h (W_0 = 0 implicit).
// The excursion sampler streams instead of materializing; this exists for
// diagnostics and for the brute-force scanners in the tests.
struct DriftPath {
  double lambda = 0.0;
  double horizon = 0.0;
  double step = 0.0;
  bool zero_noise = false;
  std::vector<double> values;
};

inline DriftPath sample_drift_path(double lambda, double T, double h,
                                   std::uint64_t seed,
                                   ExcursionOptions opts = {}) {
  if (!(T > 0.0) || !(h > 0.0)) throw std::invalid_argument("T, h > 0 required");
  DriftPath path;
  path.lambda = lambda;
  path.horizon = T;
  path.step = h;
  path.zero_noise = opts.zero_noise;
  const std::uint64_t n_steps = static_cast<std::uint64_t>(T / h);
  path.values.resize(n_steps);
  const double sqrt_h = std::sqrt(h);
  double w = 0.0;
  for (std::uint64_t k = 1; k <= n_steps; ++k) {
    if (!opts.zero_noise) w += sqrt_h * rng::normal(seed, rng::kBrownian, k);
    const double t = static_cast<double>(k) * h;
    path.values[k - 1] = w + lambda * t - 0.5 * t * t;
  }
  return path;
}

// Default truncation horizon; doubling it must not move kappa estimates by
// more than their standard error (enforced in the acceptance suite).
inline double default_horizon(double lambda) {
  return 4.0 * std::max(std::abs(lambda), 1.0) + 16.0;
}

// Simulate W on the grid, add the parabolic drift, subtract the running
// minimum and extract maximal positive stretches. Lengths are counted in
// grid steps times h.
inline ExcursionLengths sample_excursions(double lambda, double T, double h,
                                          std::uint64_t seed,
                                          ExcursionOptions opts = {}) {
  if (!(T > 0.0) || !(h > 0.0)) throw std::invalid_argument("T, h > 0 required");
  if (h > T / 100.0) throw std::invalid_argument("h <= T/100 required");
  ExcursionLengths out;
  out.horizon = T;
  out.step = h;
  const std::uint64_t n_steps = static_cast<std::uint64_t>(T / h);
  const double sqrt_h = std::sqrt(h);
  double w = 0.0;          // Brownian part
  double run_min = 0.0;    // running minimum of the drifted path
  std::uint64_t stretch = 0;
  auto close_stretch = [&]() {
    if (stretch >= 2) {
      const double len = static_cast<double>(stretch) * h;
      out.lengths.push_back(len);
      out.sum_sq += len * len;
    } else if (stretch > 0) {
      ++out.discarded;
    }
    stretch = 0;
  };
  for (std::uint64_t k = 1; k <= n_steps; ++k) {
    if (!opts.zero_noise) w += sqrt_h * rng::normal(seed, rng::kBrownian, k);
    const double t = static_cast<double>(k) * h;
    const double value = w + lambda * t - 0.5 * t * t;
    if (value > run_min) {
      ++stretch;
    } else {
      run_min = value;
      close_stretch();
    }
  }
  close_stretch();
  std::sort(out.lengths.begin(), out.lengths.end(), std::greater<>());
  return out;
}

struct KappaEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
  std::size_t n_samples = 0;
  std::uint64_t discarded_excursions = 0;
};

inline KappaEstimate kappa_brownian(double lambda, double T, double h,
                                    std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("n_samples >= 1 required");
  std::vector<double> xs(n_samples);
  KappaEstimate out;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const auto exc = sample_excursions(
        lambda, T, h, rng::derive(seed, rng::kSampling, i));
    xs[i] = exc.sum_sq;
    out.discarded_excursions += exc.discarded;
  }
  const auto est = stats::mean_and_se(xs);
  out.value = est.mean;
  out.stderr_ = est.stderr_;
  out.n_samples = n_samples;
  return out;
}

// --- Erdos-Renyi side ---

// Edge list of G(n, p) by geometric skip sampling over the C(n,2) pair
// indices in row-major order.
inline std::vector<std::pair<std::uint32_t, std::uint32_t>> er_edges(
    std::uint64_t n, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p in [0,1]");
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  if (p <= 0.0 || n < 2) return edges;
  rng::Sequence seq(seed, rng::kErEdges);
  if (p >= 1.0) {
    for (std::uint64_t i = 0; i < n; ++i)
      for (std::uint64_t j = i + 1; j < n; ++j)
        edges.emplace_back(static_cast<std::uint32_t>(i),
                           static_cast<std::uint32_t>(j));
    return edges;
  }
  const double log_q = std::log1p(-p);
  const double total_d =
      0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  double pos = 0.0;  // exact integers below 2^53 for the n used here
  while (true) {
    const double u = seq.next_unit_open();
    pos += 1.0 + std::floor(std::log(u) / log_q);
    if (pos > total_d) break;
    // map linear pair index (1-based) to (i, j), i < j
    const std::uint64_t k = static_cast<std::uint64_t>(pos) - 1;
    const double nn = static_cast<double>(n);
    double fi = std::floor(
        (2.0 * nn - 1.0 -
         std::sqrt((2.0 * nn - 1.0) * (2.0 * nn - 1.0) -
                   8.0 * static_cast<double>(k))) /
        2.0);
    // fix up floating point at the row boundaries
    auto row_start = [&](double i) { return i * nn - i * (i + 1.0) / 2.0; };
    while (fi > 0 && row_start(fi) > static_cast<double>(k)) fi -= 1.0;
    while (row_start(fi + 1.0) <= static_cast<double>(k)) fi += 1.0;
    const std::uint64_t i = static_cast<std::uint64_t>(fi);
    const std::uint64_t j =
        i + 1 + (k - static_cast<std::uint64_t>(row_start(fi)));
    edges.emplace_back(static_cast<std::uint32_t>(i),
                       static_cast<std::uint32_t>(j));
  }
  return edges;
}

inline std::vector<std::uint64_t> er_component_sizes(std::uint64_t n, double p,
                                                     std::uint64_t seed) {
  UnionFind uf(n);
  for (const auto& [i, j] : er_edges(n, p, seed)) uf.unite(i, j);
  auto sizes32 = uf.component_sizes();
  std::vector<std::uint64_t> out(sizes32.begin(), sizes32.end());
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

inline double er_edge_probability(std::uint64_t n, double lambda) {
  const double n13 = std::cbrt(static_cast<double>(n));
  const double factor = 1.0 + lambda / n13;
  if (!(factor > 0.0) || factor > n13 * n13)
    throw std::invalid_argument(
        "lambda out of range: need 1 + lambda*n^{-1/3} in (0, n^{2/3}]");
  return factor / static_cast<double>(n);
}

// kappa(lambda) via E|C(v)|/n^{1/3} = n^{-4/3} E sum |C_i|^2.
inline KappaEstimate kappa_er(double lambda, std::uint64_t n,
                              std::size_t n_samples, std::uint64_t seed) {
  if (n < 1000) throw std::invalid_argument("n >= 1000 required");
  if (n_samples < 1) throw std::invalid_argument("n_samples >= 1 required");
  const double p = er_edge_probability(n, lambda);
  const double scale = std::pow(static_cast<double>(n), -4.0 / 3.0);
  std::vector<double> xs(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const auto sizes =
        er_component_sizes(n, p, rng::derive(seed, rng::kSampling, i));
    double s = 0.0;
    for (auto c : sizes) s += static_cast<double>(c) * static_cast<double>(c);
    xs[i] = s * scale;
  }
  const auto est = stats::mean_and_se(xs);
  return {est.mean, est.stderr_, n_samples, 0};
}

// Top-k rescaled component sizes n^{-2/3} (|C_1|,...,|C_k|); the finite-n
// reference distribution for Z_lambda in two-sample tests.
inline std::vector<double> er_size_vector(std::uint64_t n, double lambda,
                                          std::uint64_t seed, std::size_t k) {
  if (k < 1) throw std::invalid_argument("k >= 1 required");
  const double p = er_edge_probability(n, lambda);
  const auto sizes = er_component_sizes(n, p, seed);
  const double scale = std::pow(static_cast<double>(n), -2.0 / 3.0);
  std::vector<double> out(k, 0.0);
  for (std::size_t i = 0; i < k && i < sizes.size(); ++i)
    out[i] = static_cast<double>(sizes[i]) * scale;
  return out;
}

}  // namespace percolab::oracle
