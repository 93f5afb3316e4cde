#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "percolab/flat_set.hpp"
#include "percolab/graph.hpp"
#include "percolab/rng.hpp"
#include "percolab/stats.hpp"
#include "percolab/union_find.hpp"

// Seeded, coupled bond percolation. Edge uniforms are a pure function of
// (seed, canonical edge id) and are never stored, so H_p for every p in
// [0,1] lives on one shared realization: p1 <= p2 implies every p1-open
// edge is p2-open.

namespace percolab {

struct ComponentStats {
  // Component sizes, weakly decreasing, summing to V.
  std::vector<std::uint64_t> sizes;
  // Per-component diameters, parallel to sizes. Entry is exact where
  // exact_diameter[i] is true, otherwise the diam <= size-1 upper bound.
  std::vector<std::uint32_t> diameters;
  std::vector<bool> exact_diameter;
  Vertex total_vertices = 0;

  std::vector<double> rescaled_sizes(std::size_t k) const {
    const double scale =
        std::pow(static_cast<double>(total_vertices), -2.0 / 3.0);
    std::vector<double> out(k, 0.0);
    for (std::size_t i = 0; i < k && i < sizes.size(); ++i)
      out[i] = static_cast<double>(sizes[i]) * scale;
    return out;
  }

  double l2_sum() const {
    double s = 0.0;
    for (auto v : sizes) s += static_cast<double>(v) * static_cast<double>(v);
    return s;
  }
};

class PercolationSample {
 public:
  PercolationSample(const TransitiveGraph& g, std::uint64_t seed)
      : g_(&g), seed_(seed) {}

  const TransitiveGraph& graph() const { return *g_; }
  std::uint64_t seed() const { return seed_; }

  // Canonical edge id: (endpoint owning the edge, slot). For the hypercube
  // the owner is the endpoint with the flipped bit cleared; for explicit
  // graphs the smaller endpoint owns the edge.
  std::uint64_t edge_id(Vertex v, int slot) const {
    if (g_->is_hypercube()) {
      const Vertex owner = v & ~(Vertex{1} << slot);
      return owner * static_cast<std::uint64_t>(g_->degree()) +
             static_cast<std::uint64_t>(slot);
    }
    const Vertex u = g_->neighbor(v, slot);
    const Vertex owner = std::min(u, v);
    const Vertex other = std::max(u, v);
    int owner_slot = 0;
    for (int j = 0; j < g_->degree(); ++j)
      if (g_->neighbor(owner, j) == other) {
        owner_slot = j;
        break;
      }
    return owner * static_cast<std::uint64_t>(g_->degree()) +
           static_cast<std::uint64_t>(owner_slot);
  }

  double edge_uniform(Vertex v, int slot) const {
    return rng::uniform(seed_, rng::kEdges, edge_id(v, slot));
  }

  bool edge_open(Vertex v, int slot, double p) const {
    return edge_uniform(v, slot) <= p;
  }

  // Union-find over one vertex-major pass; each undirected edge is owned
  // by exactly one endpoint and sampled exactly once.
  UnionFind components(double p) const {
    check_p(p);
    const Vertex V = g_->vertex_count();
    const int m = g_->degree();
    UnionFind uf(V);
    if (g_->is_hypercube()) {
      for (Vertex v = 0; v < V; ++v) {
        for (int i = 0; i < m; ++i) {
          if (v & (Vertex{1} << i)) continue;  // owner has the bit cleared
          const std::uint64_t id =
              v * static_cast<std::uint64_t>(m) + static_cast<std::uint64_t>(i);
          if (rng::uniform(seed_, rng::kEdges, id) <= p)
            uf.unite(static_cast<std::uint32_t>(v),
                     static_cast<std::uint32_t>(v | (Vertex{1} << i)));
        }
      }
    } else {
      for (Vertex v = 0; v < V; ++v) {
        for (int i = 0; i < m; ++i) {
          const Vertex u = g_->neighbor(v, i);
          if (u < v) continue;
          if (edge_open(v, i, p))
            uf.unite(static_cast<std::uint32_t>(v),
                     static_cast<std::uint32_t>(u));
        }
      }
    }
    return uf;
  }

  // |C(start)| via BFS in the p-open subgraph; consults the same coupled
  // uniforms as components().
  std::uint64_t cluster_size(double p, Vertex start) const {
    check_p(p);
    return bfs_cluster(p, start, nullptr);
  }

  // BFS ball of radius r: (|B(x,r)|, boundary nonempty). The boundary
  // flag is true iff some vertex sits at p-distance exactly r; at r=0 the
  // ball is {x} and the flag is true by convention.
  std::pair<std::uint64_t, bool> ball(double p, Vertex x, int r) const {
    check_p(p);
    if (r < 0) throw std::invalid_argument("r >= 0 required");
    g_->check_vertex(x);
    FlatSet seen;
    seen.insert(x);
    std::vector<Vertex> frontier{x}, next;
    int depth = 0;
    bool boundary_at_r = (r == 0);
    while (!frontier.empty() && depth < r) {
      next.clear();
      for (Vertex v : frontier) {
        for (int i = 0; i < g_->degree(); ++i) {
          if (!edge_open(v, i, p)) continue;
          const Vertex u = g_->neighbor(v, i);
          if (seen.insert(u)) next.push_back(u);
        }
      }
      frontier.swap(next);
      ++depth;
      if (depth == r && !frontier.empty()) boundary_at_r = true;
    }
    return {seen.size(), boundary_at_r};
  }

 private:
  void check_p(double p) const {
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("p must lie in [0,1]");
  }

  std::uint64_t bfs_cluster(double p, Vertex start,
                            std::vector<Vertex>* members) const {
    FlatSet seen;
    seen.insert(start);
    std::vector<Vertex> stack{start};
    std::uint64_t n = 0;
    while (!stack.empty()) {
      const Vertex v = stack.back();
      stack.pop_back();
      ++n;
      if (members) members->push_back(v);
      for (int i = 0; i < g_->degree(); ++i) {
        if (!edge_open(v, i, p)) continue;
        const Vertex u = g_->neighbor(v, i);
        if (seen.insert(u)) stack.push_back(u);
      }
    }
    return n;
  }

  const TransitiveGraph* g_;
  std::uint64_t seed_;
};

namespace detail {

// BFS eccentricity inside one open component. Optionally hands back the
// deepest BFS layer (the peripheral vertices).
inline std::uint32_t eccentricity(const PercolationSample& s, double p,
                                  Vertex start, FlatSet& seen,
                                  std::vector<Vertex>* deepest = nullptr) {
  seen.clear();
  seen.insert(start);
  std::vector<Vertex> frontier{start}, next;
  std::uint32_t depth = 0;
  const auto& g = s.graph();
  while (true) {
    next.clear();
    for (Vertex v : frontier) {
      for (int i = 0; i < g.degree(); ++i) {
        if (!s.edge_open(v, i, p)) continue;
        const Vertex u = g.neighbor(v, i);
        if (seen.insert(u)) next.push_back(u);
      }
    }
    if (next.empty()) break;
    ++depth;
    frontier.swap(next);
  }
  if (deepest) *deepest = frontier;
  return depth;
}

}  // namespace detail

struct DiameterOptions {
  // Components at or below this size get the exact all-sources BFS diameter.
  std::uint64_t exact_floor = 192;
  // Larger components: double sweep plus exact BFS from up to this many
  // peripheral vertices. Exact on trees; validated against full BFS at
  // small m in the test suite.
  int peripheral_sources = 32;
};

// Connected components of the p-open subgraph, sizes sorted descending.
// Ties broken by smallest contained vertex id so output is deterministic.
inline ComponentStats percolate(const PercolationSample& sample, double p,
                                bool with_diameters = false,
                                DiameterOptions diam_opts = {}) {
  const Vertex V = sample.graph().vertex_count();
  UnionFind uf = sample.components(p);
  std::uint32_t k = 0;
  const auto ids = uf.component_ids(&k);

  std::vector<std::uint64_t> size(k, 0);
  std::vector<Vertex> min_vertex(k, V);
  for (Vertex v = 0; v < V; ++v) {
    ++size[ids[v]];
    min_vertex[ids[v]] = std::min(min_vertex[ids[v]], v);
  }
  std::vector<std::uint32_t> order(k);
  for (std::uint32_t i = 0; i < k; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (size[a] != size[b]) return size[a] > size[b];
    return min_vertex[a] < min_vertex[b];
  });

  ComponentStats stats;
  stats.total_vertices = V;
  stats.sizes.reserve(k);
  for (std::uint32_t i : order) stats.sizes.push_back(size[i]);

  if (with_diameters) {
    std::vector<std::vector<Vertex>> members(k);
    for (Vertex v = 0; v < V; ++v) members[ids[v]].push_back(v);
    stats.diameters.resize(k, 0);
    stats.exact_diameter.resize(k, false);
    FlatSet seen;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
      const auto& comp = members[order[rank]];
      std::uint32_t diam = 0;
      bool exact = true;
      if (comp.size() <= diam_opts.exact_floor) {
        for (Vertex v : comp)
          diam = std::max(diam, detail::eccentricity(sample, p, v, seen));
      } else {
        // double sweep, then exact BFS from the deepest layer
        std::vector<Vertex> layer;
        detail::eccentricity(sample, p, comp[0], seen, &layer);
        const Vertex a = layer.empty() ? comp[0] : layer[0];
        diam = detail::eccentricity(sample, p, a, seen, &layer);
        if (layer.size() >
            static_cast<std::size_t>(diam_opts.peripheral_sources))
          layer.resize(diam_opts.peripheral_sources);
        for (Vertex v : layer)
          diam = std::max(diam, detail::eccentricity(sample, p, v, seen));
        exact = false;  // lower bound in general, exact on trees
      }
      stats.diameters[rank] = diam;
      stats.exact_diameter[rank] = exact;
    }
  }
  return stats;
}

// chi(p) = E_p|C(v)| estimated at v = 0 (transitivity) over independent
// seeds derived from `seed`.
inline stats::Estimate susceptibility(const TransitiveGraph& g, double p,
                                      std::size_t n_samples,
                                      std::uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("n_samples >= 1 required");
  std::vector<double> xs(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    PercolationSample s(g, rng::derive(seed, rng::kSampling, i));
    xs[i] = static_cast<double>(s.cluster_size(p, 0));
  }
  return stats::mean_and_se(xs);
}

struct LongThinScanResult {
  std::uint64_t count = 0;        // vertices with |B(v,R)| <= M and boundary at R
  std::uint64_t scanned = 0;      // vertices examined
  bool subsampled = false;
};

// Count of "long and thin" balls. Scans every vertex unless V exceeds the
// cap, in which case a uniform subsample of `cap` vertices is used and
// reported as such.
inline LongThinScanResult long_thin_scan(const PercolationSample& sample,
                                         double p, int R, std::uint64_t M,
                                         std::uint64_t cap = (1ull << 20)) {
  if (R < 1) throw std::invalid_argument("R >= 1 required");
  if (M < 1) throw std::invalid_argument("M >= 1 required");
  const Vertex V = sample.graph().vertex_count();
  LongThinScanResult out;
  auto test_vertex = [&](Vertex v) {
    const auto [size, boundary] = sample.ball(p, v, R);
    if (size <= M && boundary) ++out.count;
  };
  if (V <= cap) {
    out.scanned = V;
    for (Vertex v = 0; v < V; ++v) test_vertex(v);
  } else {
    out.subsampled = true;
    out.scanned = cap;
    for (std::uint64_t i = 0; i < cap; ++i) {
      const Vertex v = static_cast<Vertex>(
          rng::hash(sample.seed(), rng::kSampling, i) % V);
      test_vertex(v);
    }
  }
  return out;
}

// Normalized l4 tails over components ranked >= k (1-based rank):
// (sum |C_i|^4 / V^{8/3}, sum diam(C_i)^4 / V^{4/3}).
inline std::pair<double, double> tail_and_l4_stats(const ComponentStats& st,
                                                   std::size_t k) {
  if (k < 1) throw std::invalid_argument("k >= 1 required");
  if (k > st.sizes.size()) return {0.0, 0.0};
  const double V = static_cast<double>(st.total_vertices);
  double s4 = 0.0, d4 = 0.0;
  for (std::size_t i = k - 1; i < st.sizes.size(); ++i) {
    const double s = static_cast<double>(st.sizes[i]);
    s4 += s * s * s * s;
    double diam;
    if (i < st.diameters.size())
      diam = static_cast<double>(st.diameters[i]);
    else
      diam = s - 1.0;  // upper bound for components without a computed diameter
    d4 += diam * diam * diam * diam;
  }
  return {s4 / std::pow(V, 8.0 / 3.0), d4 / std::pow(V, 4.0 / 3.0)};
}

}  // namespace percolab
