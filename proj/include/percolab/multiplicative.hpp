#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "percolab/rng.hpp"
#include "percolab/stats.hpp"
#include "percolab/union_find.hpp"

// Multiplicative random graphs over arbitrary weight vectors: direct
// pair sampling, the exploration process with exponential clocks, and
// the scaling-limit condition report.

namespace percolab::mult {

struct WeightVector {
  std::vector<double> weights;
  double q = 0.0;
  double sigma1 = 0.0, sigma2 = 0.0, sigma3 = 0.0;

  WeightVector(std::vector<double> w, double q_) : weights(std::move(w)), q(q_) {
    if (weights.empty()) throw std::invalid_argument("n >= 1 weights required");
    if (q < 0.0) throw std::invalid_argument("q >= 0 required");
    for (double x : weights) {
      if (!(x > 0.0)) throw std::invalid_argument("weights must be positive");
      sigma1 += x;
      sigma2 += x * x;
      sigma3 += x * x * x;
    }
  }

  std::size_t size() const { return weights.size(); }
};

struct ComponentPartition {
  // weights[i] = total weight of component i, weakly decreasing; members
  // lists index sets, parallel to weights. Ties broken by minimum label.
  std::vector<double> weights;
  std::vector<std::vector<std::uint32_t>> members;

  double sum_sq_weights() const {
    double s = 0.0;
    for (double w : weights) s += w * w;
    return s;
  }
};

namespace detail {

inline ComponentPartition partition_from(const WeightVector& wv,
                                         UnionFind& uf) {
  std::uint32_t k = 0;
  const auto ids = uf.component_ids(&k);
  ComponentPartition part;
  part.weights.assign(k, 0.0);
  part.members.assign(k, {});
  for (std::uint32_t i = 0; i < wv.size(); ++i) {
    part.weights[ids[i]] += wv.weights[i];
    part.members[ids[i]].push_back(i);
  }
  std::vector<std::uint32_t> order(k);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (part.weights[a] != part.weights[b])
      return part.weights[a] > part.weights[b];
    return part.members[a].front() < part.members[b].front();
  });
  ComponentPartition out;
  out.weights.reserve(k);
  out.members.reserve(k);
  for (auto i : order) {
    out.weights.push_back(part.weights[i]);
    out.members.push_back(std::move(part.members[i]));
  }
  return out;
}

}  // namespace detail

// Each unordered pair {i,j} open independently with prob 1 - exp(-q w_i w_j).
// Below the threshold this is the quadratic reference loop; above it, a
// weight-bucketed sampler with geometric skips inside bucket pairs.
inline ComponentPartition sample_direct(const WeightVector& wv,
                                        std::uint64_t seed,
                                        std::size_t bucketed_threshold = 10000) {
  const std::size_t n = wv.size();
  UnionFind uf(n);
  if (wv.q > 0.0 && n > 1) {
    if (n <= bucketed_threshold) {
      rng::Sequence seq(seed, rng::kPairUniforms);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
          const double p =
              -std::expm1(-wv.q * wv.weights[i] * wv.weights[j]);
          if (seq.next_unit() < p)
            uf.unite(static_cast<std::uint32_t>(i),
                     static_cast<std::uint32_t>(j));
        }
    } else {
      // Bucket indices by floor(log2 w); pairs of buckets are scanned with
      // geometric skips under the envelope probability of the bucket pair,
      // then thinned to the exact per-pair probability.
      std::vector<int> expo(n);
      int lo = 1 << 30, hi = -(1 << 30);
      for (std::size_t i = 0; i < n; ++i) {
        expo[i] = static_cast<int>(std::floor(std::log2(wv.weights[i])));
        lo = std::min(lo, expo[i]);
        hi = std::max(hi, expo[i]);
      }
      const int n_buckets = hi - lo + 1;
      std::vector<std::vector<std::uint32_t>> buckets(n_buckets);
      for (std::size_t i = 0; i < n; ++i)
        buckets[expo[i] - lo].push_back(static_cast<std::uint32_t>(i));
      rng::Sequence seq(seed, rng::kPairUniforms);
      for (int a = 0; a < n_buckets; ++a) {
        if (buckets[a].empty()) continue;
        const double wa_max = std::ldexp(1.0, a + lo + 1);
        for (int b = a; b < n_buckets; ++b) {
          if (buckets[b].empty()) continue;
          const double wb_max = std::ldexp(1.0, b + lo + 1);
          const double p_env =
              std::min(1.0, -std::expm1(-wv.q * wa_max * wb_max));
          if (p_env <= 0.0) continue;
          const std::uint64_t na = buckets[a].size();
          const std::uint64_t nb = buckets[b].size();
          const std::uint64_t total =
              (a == b) ? na * (na - 1) / 2 : na * nb;
          const double log_q = std::log1p(-p_env);
          double pos = 0.0;
          while (true) {
            if (p_env >= 1.0) {
              pos += 1.0;
            } else {
              const double u = seq.next_unit_open();
              pos += 1.0 + std::floor(std::log(u) / log_q);
            }
            if (pos > static_cast<double>(total)) break;
            const std::uint64_t k = static_cast<std::uint64_t>(pos) - 1;
            std::uint32_t i, j;
            if (a == b) {
              // triangular index inside one bucket
              const double nn = static_cast<double>(na);
              double fi = std::floor(
                  (2.0 * nn - 1.0 -
                   std::sqrt((2.0 * nn - 1.0) * (2.0 * nn - 1.0) -
                             8.0 * static_cast<double>(k))) /
                  2.0);
              auto row_start = [&](double r) {
                return r * nn - r * (r + 1.0) / 2.0;
              };
              while (fi > 0 && row_start(fi) > static_cast<double>(k)) fi -= 1.0;
              while (row_start(fi + 1.0) <= static_cast<double>(k)) fi += 1.0;
              const std::uint64_t ii = static_cast<std::uint64_t>(fi);
              const std::uint64_t jj =
                  ii + 1 + (k - static_cast<std::uint64_t>(row_start(fi)));
              i = buckets[a][ii];
              j = buckets[a][jj];
            } else {
              i = buckets[a][k / nb];
              j = buckets[b][k % nb];
            }
            const double p_ij =
                -std::expm1(-wv.q * wv.weights[i] * wv.weights[j]);
            if (seq.next_unit() < p_ij / p_env) uf.unite(i, j);
          }
        }
      }
    }
  }
  return detail::partition_from(wv, uf);
}

// Exploration trace: Y_t = -t + sum_i w_i 1(E_i <= t) with clocks
// E_i ~ Exp(q w_i); excursions above the running infimum are the
// components, and the infimum level during excursion i is its local time.
struct ExplorationTrace {
  ComponentPartition partition;
  // Parallel to partition: excursion time-length and local time |inf|.
  std::vector<double> excursion_lengths;
  std::vector<double> local_times;
  double total_jump_mass = 0.0;
  double end_time = 0.0;
  double final_value = 0.0;  // Y at the end of the last excursion sweep
};

inline ExplorationTrace sample_exploration(const WeightVector& wv,
                                           std::uint64_t seed) {
  if (!(wv.q > 0.0))
    throw std::invalid_argument("q > 0 required: no clock fires at q = 0");
  const std::size_t n = wv.size();
  std::vector<std::pair<double, std::uint32_t>> clocks(n);
  for (std::size_t i = 0; i < n; ++i)
    clocks[i] = {rng::exponential(seed, rng::kClocks, i, wv.q * wv.weights[i]),
                 static_cast<std::uint32_t>(i)};
  std::sort(clocks.begin(), clocks.end());

  // Sweep jumps in clock order. Between jumps drift is -1, so the value
  // just before the jump at time t is y - (t - t_prev). An excursion ends
  // when the value returns to the running infimum.
  struct RawExcursion {
    double start, level, weight;
    std::vector<std::uint32_t> members;
  };
  std::vector<RawExcursion> excursions;
  double y = 0.0, t_prev = 0.0, inf = 0.0;
  bool in_excursion = false;
  std::size_t current = 0;
  for (const auto& [t, idx] : clocks) {
    const double value_before = y - (t - t_prev);
    if (in_excursion && value_before <= inf) in_excursion = false;
    if (!in_excursion) {
      // Path sat at its (new) infimum just before this jump, which
      // therefore opens a fresh excursion at that level.
      inf = value_before;
      excursions.push_back({t, -inf, 0.0, {}});
      current = excursions.size() - 1;
      in_excursion = true;
    }
    excursions[current].members.push_back(idx);
    excursions[current].weight += wv.weights[idx];
    y = value_before + wv.weights[idx];
    t_prev = t;
  }

  ExplorationTrace trace;
  trace.total_jump_mass = wv.sigma1;
  trace.end_time = t_prev + (y - inf >= 0.0 ? y - inf : 0.0);
  trace.final_value = y - (trace.end_time - t_prev);

  // Order components by weight (ties by min label), mirroring the
  // partition convention, and carry lengths/local times along.
  std::vector<std::size_t> order(excursions.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (excursions[a].weight != excursions[b].weight)
      return excursions[a].weight > excursions[b].weight;
    return *std::min_element(excursions[a].members.begin(),
                             excursions[a].members.end()) <
           *std::min_element(excursions[b].members.begin(),
                             excursions[b].members.end());
  });
  for (std::size_t r : order) {
    auto& e = excursions[r];
    std::sort(e.members.begin(), e.members.end());
    trace.partition.weights.push_back(e.weight);
    trace.partition.members.push_back(e.members);
    // The excursion length in time equals its jump mass: the path returns
    // to the starting infimum after consuming exactly the component weight.
    trace.excursion_lengths.push_back(e.weight);
    trace.local_times.push_back(e.level);
  }
  return trace;
}

struct ConditionReport {
  double sigma3_over_sigma2_cubed = 0.0;
  double q_minus_inv_sigma2 = 0.0;
  double max_w_over_sigma2 = 0.0;
  double max_w_over_sigma2_pow = 0.0;   // max w / sigma2^{3/2 + eta0}
  double sigma2_pow_over_min_w = 0.0;   // sigma2^{r0} / min w
  double eta0 = 0.0;
  double r0 = 0.0;
};

inline ConditionReport check_conditions(const WeightVector& wv,
                                        double eta0 = 0.1, double r0 = 13.0) {
  if (!(eta0 > 0.0 && eta0 <= 1.0 / 6.0))
    throw std::invalid_argument("eta0 in (0, 1/6] required");
  if (!(r0 > 12.0)) throw std::invalid_argument("r0 > 12 required");
  ConditionReport rep;
  rep.eta0 = eta0;
  rep.r0 = r0;
  const double wmax = *std::max_element(wv.weights.begin(), wv.weights.end());
  const double wmin = *std::min_element(wv.weights.begin(), wv.weights.end());
  rep.sigma3_over_sigma2_cubed = wv.sigma3 / std::pow(wv.sigma2, 3.0);
  rep.q_minus_inv_sigma2 = wv.q - 1.0 / wv.sigma2;
  rep.max_w_over_sigma2 = wmax / wv.sigma2;
  rep.max_w_over_sigma2_pow = wmax / std::pow(wv.sigma2, 1.5 + eta0);
  rep.sigma2_pow_over_min_w = std::pow(wv.sigma2, r0) / wmin;
  return rep;
}

// Monte Carlo E sum_i w(C_i)^2 over independent direct samples.
inline stats::Estimate susceptibility_mult(const WeightVector& wv,
                                           std::size_t n_samples,
                                           std::uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("n_samples >= 1 required");
  std::vector<double> xs(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i)
    xs[i] = sample_direct(wv, rng::derive(seed, rng::kSampling, i)).sum_sq_weights();
  return stats::mean_and_se(xs);
}

}  // namespace percolab::mult
