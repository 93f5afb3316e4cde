#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <vector>

#include "percolab/calibration.hpp"
#include "percolab/percolation.hpp"
#include "percolab/rng.hpp"
#include "percolab/union_find.hpp"

// The constructions over a fixed H_{p_s} realization: the weighted
// component set, boundary edge counts Delta_{A,B}, the multiplicative twin
// G_x and the sprinkled graph G_comp over shared pair uniforms, their
// discrepancy accounting, connection matrices, N(p), the full component
// graph, girth scanning and the d_box vs d_comp comparison.

namespace percolab::compgraph {

struct WeightedComponents {
  const TransitiveGraph* g = nullptr;
  std::uint64_t sample_seed = 0;
  double p_s = 0.0;
  std::uint64_t M_s = 1;

  // Retained components (|A| >= M_s), sorted by size desc then min vertex.
  std::vector<std::vector<Vertex>> members;
  std::vector<std::uint64_t> sizes;
  std::vector<double> weights;      // |A| * V^{-2/3}
  std::vector<Vertex> min_vertex;   // stable key for the pair uniforms

  // comp_of[v]: retained component index, or -1 outside V_*.
  std::vector<std::int32_t> comp_of;
  std::uint64_t vstar_size = 0;
  std::uint64_t excluded_mass = 0;

  // Full H_{p_s} partition (every component, no threshold), for the full
  // component graph and the girth scan.
  std::vector<std::uint32_t> full_ids;
  std::uint32_t n_full = 0;

  std::size_t size() const { return members.size(); }

  double sigma_r(int r) const {
    double s = 0.0;
    for (double w : weights) s += std::pow(w, r);
    return s;
  }
};

inline WeightedComponents extract_weighted_components(
    const PercolationSample& sample, const calib::WindowParams& window) {
  if (sample.graph().vertex_count() != window.V ||
      sample.graph().degree() != window.m)
    throw std::invalid_argument("window was derived for a different graph");
  WeightedComponents wc;
  wc.g = &sample.graph();
  wc.sample_seed = sample.seed();
  wc.p_s = window.p_s;
  wc.M_s = window.M_s;
  const Vertex V = wc.g->vertex_count();
  const double v23 = std::pow(static_cast<double>(V), -2.0 / 3.0);

  UnionFind uf = sample.components(window.p_s);
  wc.full_ids = uf.component_ids(&wc.n_full);
  std::vector<std::uint64_t> full_size(wc.n_full, 0);
  std::vector<Vertex> full_min(wc.n_full, V);
  for (Vertex v = 0; v < V; ++v) {
    ++full_size[wc.full_ids[v]];
    full_min[wc.full_ids[v]] = std::min(full_min[wc.full_ids[v]], v);
  }

  std::vector<std::uint32_t> retained;
  for (std::uint32_t c = 0; c < wc.n_full; ++c) {
    if (full_size[c] >= window.M_s)
      retained.push_back(c);
    else
      wc.excluded_mass += full_size[c];
  }
  std::sort(retained.begin(), retained.end(),
            [&](std::uint32_t a, std::uint32_t b) {
              if (full_size[a] != full_size[b])
                return full_size[a] > full_size[b];
              return full_min[a] < full_min[b];
            });

  std::vector<std::int32_t> rank_of_full(wc.n_full, -1);
  for (std::size_t r = 0; r < retained.size(); ++r)
    rank_of_full[retained[r]] = static_cast<std::int32_t>(r);

  wc.members.resize(retained.size());
  wc.sizes.resize(retained.size());
  wc.weights.resize(retained.size());
  wc.min_vertex.resize(retained.size());
  for (std::size_t r = 0; r < retained.size(); ++r) {
    wc.sizes[r] = full_size[retained[r]];
    wc.weights[r] = static_cast<double>(wc.sizes[r]) * v23;
    wc.min_vertex[r] = full_min[retained[r]];
    wc.members[r].reserve(wc.sizes[r]);
  }
  wc.comp_of.assign(V, -1);
  for (Vertex v = 0; v < V; ++v) {
    const std::int32_t r = rank_of_full[wc.full_ids[v]];
    if (r >= 0) {
      wc.comp_of[v] = r;
      wc.members[r].push_back(v);
      ++wc.vstar_size;
    }
  }
  return wc;
}

// Restrict to the K heaviest components (the guidance when the matrix cap
// rejects a large component set).
inline WeightedComponents restrict_to_top(const WeightedComponents& wc,
                                          std::size_t K) {
  WeightedComponents out;
  out.g = wc.g;
  out.sample_seed = wc.sample_seed;
  out.p_s = wc.p_s;
  out.M_s = wc.M_s;
  out.full_ids = wc.full_ids;
  out.n_full = wc.n_full;
  const std::size_t k = std::min(K, wc.size());
  out.members.assign(wc.members.begin(), wc.members.begin() + k);
  out.sizes.assign(wc.sizes.begin(), wc.sizes.begin() + k);
  out.weights.assign(wc.weights.begin(), wc.weights.begin() + k);
  out.min_vertex.assign(wc.min_vertex.begin(), wc.min_vertex.begin() + k);
  out.comp_of.assign(wc.comp_of.size(), -1);
  out.excluded_mass = wc.excluded_mass;
  for (std::size_t r = 0; r < k; ++r)
    for (Vertex v : out.members[r]) {
      out.comp_of[v] = static_cast<std::int32_t>(r);
      ++out.vstar_size;
    }
  for (std::size_t r = k; r < wc.size(); ++r) out.excluded_mass += wc.sizes[r];
  return out;
}

// Exact number of host edges with one endpoint in each component; iterates
// the smaller vertex set and membership-tests each of its m neighbors.
inline std::uint64_t delta_AB(const WeightedComponents& wc, std::uint32_t a,
                              std::uint32_t b) {
  if (a == b) throw std::invalid_argument("delta_AB requires A != B");
  if (a >= wc.size() || b >= wc.size())
    throw std::invalid_argument("component index out of range");
  const std::uint32_t small = wc.sizes[a] <= wc.sizes[b] ? a : b;
  const std::uint32_t big = small == a ? b : a;
  std::uint64_t count = 0;
  const int m = wc.g->degree();
  for (Vertex v : wc.members[small])
    for (int i = 0; i < m; ++i) {
      const Vertex u = wc.g->neighbor(v, i);
      if (wc.comp_of[u] == static_cast<std::int32_t>(big)) ++count;
    }
  return count;
}

// Complete table of nonzero boundary counts. Delta_{A,B} > 0 exactly when
// A and B are host-adjacent, and every boundary edge between two distinct
// retained components is p_s-closed (a p_s-open edge joins one component);
// one pass over the host edges therefore yields every nonzero Delta.
struct DeltaTable {
  std::uint64_t n = 0;  // retained component count
  std::vector<std::pair<std::uint64_t, std::uint32_t>> entries;  // key, count

  std::uint64_t key(std::uint32_t a, std::uint32_t b) const {
    if (a > b) std::swap(a, b);
    return static_cast<std::uint64_t>(a) * n + b;
  }

  std::uint64_t delta(std::uint32_t a, std::uint32_t b) const {
    const std::uint64_t k = key(a, b);
    const auto it = std::lower_bound(
        entries.begin(), entries.end(), k,
        [](const auto& e, std::uint64_t kk) { return e.first < kk; });
    return (it != entries.end() && it->first == k) ? it->second : 0;
  }
};

inline DeltaTable boundary_delta_table(const WeightedComponents& wc) {
  DeltaTable table;
  table.n = wc.size();
  const TransitiveGraph& g = *wc.g;
  const Vertex V = g.vertex_count();
  const int m = g.degree();
  std::vector<std::uint64_t> keys;
  for (Vertex v = 0; v < V; ++v) {
    const std::int32_t ca = wc.comp_of[v];
    if (ca < 0) continue;
    for (int i = 0; i < m; ++i) {
      const Vertex u = g.neighbor(v, i);
      if (u < v) continue;
      const std::int32_t cb = wc.comp_of[u];
      if (cb < 0 || cb == ca) continue;
      keys.push_back(table.key(static_cast<std::uint32_t>(ca),
                               static_cast<std::uint32_t>(cb)));
    }
  }
  std::sort(keys.begin(), keys.end());
  for (std::size_t i = 0; i < keys.size();) {
    std::size_t j = i;
    while (j < keys.size() && keys[j] == keys[i]) ++j;
    table.entries.emplace_back(keys[i], static_cast<std::uint32_t>(j - i));
    i = j;
  }
  return table;
}

enum class BuildMode {
  kSharedUniforms,   // both graphs from shared pair uniforms
  kFromCoupling,     // G_comp from the underlying U_e sprinkle; no G_x
};

struct ComponentGraphPair {
  const WeightedComponents* wc = nullptr;
  double q_lambda = 0.0;
  double p_s = 0.0, p_c_prime = 0.0;
  int m = 0;
  double v13 = 0.0;  // V^{1/3}
  std::uint64_t pair_seed = 0;
  BuildMode mode = BuildMode::kSharedUniforms;

  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges_mult;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges_sprinkled;
  std::vector<std::uint32_t> part_mult;       // component -> class id
  std::vector<std::uint32_t> part_sprinkled;
  std::uint64_t delta_evaluations = 0;

  double q_AB(std::uint32_t a, std::uint32_t b) const {
    return -std::expm1(-q_lambda * wc->weights[a] * wc->weights[b]);
  }
  double p_AB(std::uint64_t delta) const {
    return -std::expm1(-q_lambda * static_cast<double>(delta) /
                       (static_cast<double>(m) * v13));
  }
  double pair_uniform(std::uint32_t a, std::uint32_t b) const {
    const Vertex lo = std::min(wc->min_vertex[a], wc->min_vertex[b]);
    const Vertex hi = std::max(wc->min_vertex[a], wc->min_vertex[b]);
    return rng::uniform(pair_seed, rng::kPairUniforms,
                        lo * wc->g->vertex_count() + hi);
  }
};

namespace detail {

inline std::vector<std::uint32_t> partition_of(
    std::size_t n,
    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges) {
  UnionFind uf(n);
  for (const auto& [a, b] : edges) uf.unite(a, b);
  return uf.component_ids();
}

// Sprinkle edges between retained components: host edges with
// U_e in (p_s, p_c'] joining two distinct retained components.
inline std::vector<std::pair<std::uint32_t, std::uint32_t>> sprinkle_edges(
    const WeightedComponents& wc, double p_lo, double p_hi) {
  const TransitiveGraph& g = *wc.g;
  PercolationSample sample(g, wc.sample_seed);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  const Vertex V = g.vertex_count();
  const int m = g.degree();
  for (Vertex v = 0; v < V; ++v) {
    const std::int32_t ca = wc.comp_of[v];
    if (ca < 0) continue;
    for (int i = 0; i < m; ++i) {
      const Vertex u = g.neighbor(v, i);
      if (u < v) continue;  // each undirected edge once
      const std::int32_t cb = wc.comp_of[u];
      if (cb < 0 || cb == ca) continue;
      const double ue = sample.edge_uniform(v, i);
      if (ue > p_lo && ue <= p_hi)
        out.emplace_back(std::min(ca, cb), std::max(ca, cb));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace detail

// Realize the coupled pair. In shared-uniform mode the boundary table
// supplies every nonzero Delta up front, so adjacent pairs get the exact
// p_AB threshold; non-adjacent pairs have p_AB = 0 and can only carry a
// G_x edge, for which q_AB <= q w_A w_B prescreens the uniform before the
// exact threshold is evaluated. `naive_reference` computes every Delta by
// the per-pair membership count instead; it exists for cross-checking the
// table path and is quadratic in component sizes.
inline ComponentGraphPair build_pair(const WeightedComponents& wc,
                                     const calib::WindowParams& window,
                                     std::uint64_t seed,
                                     BuildMode mode = BuildMode::kSharedUniforms,
                                     bool naive_reference = false) {
  ComponentGraphPair pair;
  pair.wc = &wc;
  pair.q_lambda = window.q_lambda;
  pair.p_s = window.p_s;
  pair.p_c_prime = window.p_c_prime;
  pair.m = window.m;
  pair.v13 = std::cbrt(static_cast<double>(window.V));
  pair.pair_seed = seed;
  pair.mode = mode;
  const std::size_t n = wc.size();

  if (mode == BuildMode::kFromCoupling) {
    pair.edges_sprinkled =
        detail::sprinkle_edges(wc, window.p_s, window.p_c_prime);
    pair.part_sprinkled = detail::partition_of(n, pair.edges_sprinkled);
    pair.part_mult = detail::partition_of(n, {});
    return pair;
  }

  if (pair.q_lambda > 0.0 && n > 1) {
    if (naive_reference) {
      for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = i + 1; j < n; ++j) {
          const double u = pair.pair_uniform(i, j);
          const std::uint64_t delta = delta_AB(wc, i, j);
          ++pair.delta_evaluations;
          if (u <= pair.q_AB(i, j)) pair.edges_mult.emplace_back(i, j);
          if (u <= pair.p_AB(delta)) pair.edges_sprinkled.emplace_back(i, j);
        }
    } else {
      const auto table = boundary_delta_table(wc);
      pair.delta_evaluations = table.entries.size();
      // adjacent pairs: both thresholds live
      for (const auto& [key, delta] : table.entries) {
        const std::uint32_t i = static_cast<std::uint32_t>(key / n);
        const std::uint32_t j = static_cast<std::uint32_t>(key % n);
        const double u = pair.pair_uniform(i, j);
        if (u <= pair.q_AB(i, j)) pair.edges_mult.emplace_back(i, j);
        if (u <= pair.p_AB(delta)) pair.edges_sprinkled.emplace_back(i, j);
      }
      // non-adjacent pairs: G_x only; the weight product prescreens
      for (std::uint32_t i = 0; i < n; ++i) {
        const double qw_i = pair.q_lambda * wc.weights[i];
        for (std::uint32_t j = i + 1; j < n; ++j) {
          const double u = pair.pair_uniform(i, j);
          if (u >= qw_i * wc.weights[j]) continue;
          if (u > pair.q_AB(i, j)) continue;
          if (table.delta(i, j) == 0) pair.edges_mult.emplace_back(i, j);
        }
      }
    }
    std::sort(pair.edges_mult.begin(), pair.edges_mult.end());
    pair.edges_mult.erase(
        std::unique(pair.edges_mult.begin(), pair.edges_mult.end()),
        pair.edges_mult.end());
    std::sort(pair.edges_sprinkled.begin(), pair.edges_sprinkled.end());
  }
  pair.part_mult = detail::partition_of(n, pair.edges_mult);
  pair.part_sprinkled = detail::partition_of(n, pair.edges_sprinkled);
  return pair;
}

// Ordered-pair discrepancy mass sum |A||B| 1(!=_{A,B}) / V^{4/3}, where
// !=_{A,B} is (same G_x class) xor (same G_comp class). Computed from the
// two partitions and their join: sum_X s^2 + sum_Y s^2 - 2 sum_{X^Y} s^2.
inline double discrepancy_mass(const ComponentGraphPair& pair) {
  const auto& wc = *pair.wc;
  const std::size_t n = wc.size();
  std::map<std::uint32_t, double> sx, sy;
  std::map<std::uint64_t, double> sj;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = static_cast<double>(wc.sizes[i]);
    sx[pair.part_mult[i]] += s;
    sy[pair.part_sprinkled[i]] += s;
    sj[(static_cast<std::uint64_t>(pair.part_mult[i]) << 32) |
       pair.part_sprinkled[i]] += s;
  }
  double total = 0.0;
  for (const auto& [k, s] : sx) total += s * s;
  for (const auto& [k, s] : sy) total += s * s;
  for (const auto& [k, s] : sj) total -= 2.0 * s * s;
  const double V = static_cast<double>(wc.g->vertex_count());
  return total / std::pow(V, 4.0 / 3.0);
}

struct ConnectionMatrix {
  std::size_t n = 0;
  std::vector<double> data;  // row-major, zero diagonal

  double at(std::size_t i, std::size_t j) const { return data[i * n + j]; }
  double& at(std::size_t i, std::size_t j) { return data[i * n + j]; }
  double frobenius() const {
    double s = 0.0;
    for (double x : data) s += x * x;
    return std::sqrt(s);
  }
};

struct ConnectionMatrices {
  ConnectionMatrix t_mult;       // P*(A <-> B in G_x)
  ConnectionMatrix t_sprinkled;  // P*(A <-> B in G_comp)
  ConnectionMatrix xi;           // |q_AB - p_AB|, exact
  ConnectionMatrix t_disagree;   // P*(!=_{A,B})
};

inline ConnectionMatrices connection_matrices(const WeightedComponents& wc,
                                              const calib::WindowParams& window,
                                              std::size_t n_mc,
                                              std::uint64_t seed) {
  const std::size_t n = wc.size();
  if (n > 2000)
    throw std::invalid_argument(
        "connection_matrices: more than 2000 retained components; subsample "
        "with restrict_to_top first");
  if (n_mc < 1) throw std::invalid_argument("n_mc >= 1 required");
  ConnectionMatrices out;
  for (ConnectionMatrix* mat :
       {&out.t_mult, &out.t_sprinkled, &out.xi, &out.t_disagree}) {
    mat->n = n;
    mat->data.assign(n * n, 0.0);
  }
  const double v13 = std::cbrt(static_cast<double>(window.V));

  // exact Xi and the per-pair thresholds
  const auto table = boundary_delta_table(wc);
  std::vector<double> q_thr(n * n, 0.0), p_thr(n * n, 0.0);
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = i + 1; j < n; ++j) {
      const double q =
          -std::expm1(-window.q_lambda * wc.weights[i] * wc.weights[j]);
      const double delta = static_cast<double>(table.delta(i, j));
      const double p = -std::expm1(-window.q_lambda * delta /
                                   (static_cast<double>(window.m) * v13));
      q_thr[i * n + j] = q;
      p_thr[i * n + j] = p;
      out.xi.at(i, j) = out.xi.at(j, i) = std::abs(q - p);
    }

  std::vector<std::pair<std::uint32_t, std::uint32_t>> ex, es;
  for (std::size_t r = 0; r < n_mc; ++r) {
    ex.clear();
    es.clear();
    const std::uint64_t rs = rng::derive(seed, rng::kPairUniforms, r);
    for (std::uint32_t i = 0; i < n; ++i)
      for (std::uint32_t j = i + 1; j < n; ++j) {
        const double u = rng::uniform(
            rs, rng::kPairUniforms,
            static_cast<std::uint64_t>(i) * n + j);
        if (u <= q_thr[i * n + j]) ex.emplace_back(i, j);
        if (u <= p_thr[i * n + j]) es.emplace_back(i, j);
      }
    const auto px = detail::partition_of(n, ex);
    const auto ps = detail::partition_of(n, es);
    for (std::uint32_t i = 0; i < n; ++i)
      for (std::uint32_t j = i + 1; j < n; ++j) {
        const bool cx = px[i] == px[j];
        const bool cs = ps[i] == ps[j];
        if (cx) {
          out.t_mult.at(i, j) += 1.0;
          out.t_mult.at(j, i) += 1.0;
        }
        if (cs) {
          out.t_sprinkled.at(i, j) += 1.0;
          out.t_sprinkled.at(j, i) += 1.0;
        }
        if (cx != cs) {
          out.t_disagree.at(i, j) += 1.0;
          out.t_disagree.at(j, i) += 1.0;
        }
      }
  }
  const double inv = 1.0 / static_cast<double>(n_mc);
  for (ConnectionMatrix* mat : {&out.t_mult, &out.t_sprinkled, &out.t_disagree})
    for (double& x : mat->data) x *= inv;
  return out;
}

// N(p) / V^{4/3}: ordered connected pairs in H_p whose every path crosses a
// small (size < M_s) H_{p_s} component, via
// N(p) = sum |C_i(H_p)|^2 - sum |D_j|^2 with D_j the components of H_p
// induced on V_*.
inline double bad_pair_count(const PercolationSample& sample,
                             const calib::WindowParams& window,
                             const WeightedComponents& wc, double p) {
  if (p < window.p_s) throw std::invalid_argument("p >= p_s required");
  const TransitiveGraph& g = sample.graph();
  const Vertex V = g.vertex_count();
  const int m = g.degree();
  UnionFind all(V), induced(V);
  for (Vertex v = 0; v < V; ++v) {
    for (int i = 0; i < m; ++i) {
      const Vertex u = g.neighbor(v, i);
      if (u < v) continue;
      if (!sample.edge_open(v, i, p)) continue;
      all.unite(static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(u));
      if (wc.comp_of[v] >= 0 && wc.comp_of[u] >= 0)
        induced.unite(static_cast<std::uint32_t>(v),
                      static_cast<std::uint32_t>(u));
    }
  }
  std::vector<std::uint64_t> size_all(V, 0), size_ind(V, 0);
  for (Vertex v = 0; v < V; ++v) {
    ++size_all[all.find(static_cast<std::uint32_t>(v))];
    if (wc.comp_of[v] >= 0)
      ++size_ind[induced.find(static_cast<std::uint32_t>(v))];
  }
  double n_p = 0.0;
  for (Vertex v = 0; v < V; ++v) {
    n_p += static_cast<double>(size_all[v]) * static_cast<double>(size_all[v]);
    n_p -= static_cast<double>(size_ind[v]) * static_cast<double>(size_ind[v]);
  }
  return n_p / std::pow(static_cast<double>(V), 4.0 / 3.0);
}

struct MetricComparisonRow {
  double d_box_scaled = 0.0;   // d_box / V^{1/3}
  double d_comp_scaled = 0.0;  // chi(p_s) * d_comp / V^{1/3}
  bool in_vstar = true;        // both endpoints inside V_*
  bool comp_finite = true;     // connected in G_comp
};

// Sampled vertex pairs of the rank-r component of H_{p'_c}: vertex-level
// distance vs the rescaled G_comp distance between their p_s-components.
inline std::vector<MetricComparisonRow> metric_comparison(
    const PercolationSample& sample, const calib::WindowParams& window,
    const WeightedComponents& wc, const ComponentGraphPair& pair, int rank,
    std::size_t n_pairs, std::uint64_t seed) {
  if (rank < 1) throw std::invalid_argument("rank >= 1 required");
  const TransitiveGraph& g = sample.graph();
  const Vertex V = g.vertex_count();
  UnionFind uf = sample.components(window.p_c_prime);
  std::uint32_t k = 0;
  const auto ids = uf.component_ids(&k);
  std::vector<std::uint64_t> size(k, 0);
  for (Vertex v = 0; v < V; ++v) ++size[ids[v]];
  std::vector<std::uint32_t> order(k);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return size[a] > size[b];
  });
  if (static_cast<std::size_t>(rank) > order.size() ||
      size[order[rank - 1]] == 0)
    throw std::invalid_argument("component of requested rank does not exist");
  const std::uint32_t target = order[rank - 1];
  std::vector<Vertex> comp;
  for (Vertex v = 0; v < V; ++v)
    if (ids[v] == target) comp.push_back(v);

  // adjacency of G_comp
  std::vector<std::vector<std::uint32_t>> adj(wc.size());
  for (const auto& [a, b] : pair.edges_sprinkled) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }

  const double v13 = std::cbrt(static_cast<double>(V));
  std::vector<MetricComparisonRow> rows;
  rows.reserve(n_pairs);
  FlatSet seen;
  for (std::size_t t = 0; t < n_pairs; ++t) {
    const Vertex u =
        comp[rng::hash(seed, rng::kSampling, 2 * t) % comp.size()];
    const Vertex w =
        comp[rng::hash(seed, rng::kSampling, 2 * t + 1) % comp.size()];
    MetricComparisonRow row;
    // vertex-level BFS distance in the p'_c-open subgraph
    seen.clear();
    seen.insert(u);
    std::vector<Vertex> frontier{u}, next;
    std::uint32_t depth = 0;
    bool found = (u == w);
    while (!frontier.empty() && !found) {
      next.clear();
      for (Vertex x : frontier)
        for (int i = 0; i < g.degree(); ++i) {
          if (!sample.edge_open(x, i, window.p_c_prime)) continue;
          const Vertex y = g.neighbor(x, i);
          if (seen.insert(y)) {
            next.push_back(y);
            if (y == w) found = true;
          }
        }
      frontier.swap(next);
      ++depth;
    }
    row.d_box_scaled = found ? static_cast<double>(u == w ? 0 : depth) / v13
                             : std::numeric_limits<double>::infinity();

    const std::int32_t ca = wc.comp_of[u];
    const std::int32_t cb = wc.comp_of[w];
    if (ca < 0 || cb < 0) {
      row.in_vstar = false;
      row.comp_finite = false;
    } else if (ca == cb) {
      row.d_comp_scaled = 0.0;
    } else {
      // BFS in G_comp
      std::vector<std::int32_t> d(wc.size(), -1);
      std::queue<std::uint32_t> qq;
      d[ca] = 0;
      qq.push(static_cast<std::uint32_t>(ca));
      while (!qq.empty() && d[cb] < 0) {
        const std::uint32_t x = qq.front();
        qq.pop();
        for (std::uint32_t y : adj[x])
          if (d[y] < 0) {
            d[y] = d[x] + 1;
            qq.push(y);
          }
      }
      if (d[cb] < 0) {
        row.comp_finite = false;
      } else {
        row.d_comp_scaled =
            window.chi_ps_hat * static_cast<double>(d[cb]) / v13;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

// Girth of the full component graph restricted to its components whose
// vertex mass is at least tau * V^{2/3}. Returns infinity when acyclic.
inline double girth_scan(const WeightedComponents& wc,
                         const calib::WindowParams& window, double tau) {
  const Vertex V = wc.g->vertex_count();
  const std::uint32_t n = wc.n_full;
  // full-graph sprinkle edges over all H_{p_s} components
  PercolationSample sample(*wc.g, wc.sample_seed);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  const int m = wc.g->degree();
  for (Vertex v = 0; v < V; ++v)
    for (int i = 0; i < m; ++i) {
      const Vertex u = wc.g->neighbor(v, i);
      if (u < v) continue;
      const std::uint32_t ca = wc.full_ids[v], cb = wc.full_ids[u];
      if (ca == cb) continue;
      const double ue = sample.edge_uniform(v, i);
      if (ue > window.p_s && ue <= window.p_c_prime)
        edges.emplace_back(std::min(ca, cb), std::max(ca, cb));
    }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  std::vector<std::uint64_t> comp_size(n, 0);
  for (Vertex v = 0; v < V; ++v) ++comp_size[wc.full_ids[v]];
  UnionFind uf(n);
  for (const auto& [a, b] : edges) uf.unite(a, b);
  std::vector<double> class_mass(n, 0.0);
  for (std::uint32_t c = 0; c < n; ++c)
    class_mass[uf.find(c)] += static_cast<double>(comp_size[c]);
  const double floor_mass =
      tau * std::pow(static_cast<double>(V), 2.0 / 3.0);

  std::vector<std::vector<std::uint32_t>> adj(n);
  for (const auto& [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }

  // BFS girth over qualifying vertices.
  std::uint32_t best = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::int32_t> dist(n, -1);
  std::vector<std::uint32_t> parent(n, 0), touched;
  for (std::uint32_t root = 0; root < n; ++root) {
    if (adj[root].empty()) continue;
    if (class_mass[uf.find(root)] < floor_mass) continue;
    touched.clear();
    std::queue<std::uint32_t> qq;
    dist[root] = 0;
    parent[root] = root;
    touched.push_back(root);
    qq.push(root);
    while (!qq.empty()) {
      const std::uint32_t x = qq.front();
      qq.pop();
      if (best != std::numeric_limits<std::uint32_t>::max() &&
          static_cast<std::uint32_t>(2 * dist[x]) >= best)
        break;
      for (std::uint32_t y : adj[x]) {
        if (dist[y] < 0) {
          dist[y] = dist[x] + 1;
          parent[y] = x;
          touched.push_back(y);
          qq.push(y);
        } else if (y != parent[x]) {
          best = std::min(best,
                          static_cast<std::uint32_t>(dist[x] + dist[y] + 1));
        }
      }
    }
    for (std::uint32_t v : touched) dist[v] = -1;
  }
  return best == std::numeric_limits<std::uint32_t>::max()
             ? std::numeric_limits<double>::infinity()
             : static_cast<double>(best);
}

}  // namespace percolab::compgraph
