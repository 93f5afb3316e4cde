#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "percolab/graph.hpp"

// Non-backtracking random walk kernels, the xi-uniform mixing time and
// the random-walk triangle diagram.
//
// Two representations:
//  * a full directed-edge DP, O(V*m) state, valid for any regular graph;
//  * a coordinate-symmetry reduction for the hypercube where the state is
//    (Hamming weight of current ^ start, last-flipped bit currently set),
//    O(m) state per step. p^t(u,z) then depends on |u ^ z| only.

namespace percolab::nbrw {

inline std::vector<std::vector<double>> binomial_table(int m) {
  std::vector<std::vector<double>> c(m + 1, std::vector<double>(m + 1, 0.0));
  for (int i = 0; i <= m; ++i) {
    c[i][0] = 1.0;
    for (int j = 1; j <= i; ++j)
      c[i][j] = c[i - 1][j - 1] + (j <= i - 1 ? c[i - 1][j] : 0.0);
  }
  return c;
}

// Weight profile of the walk at a fixed time: profile[k] = total mass on
// vertices at Hamming distance k from the start.
using WeightProfile = std::vector<double>;

// Reduced hypercube DP. state[k][s]: mass at weight k with the
// last-flipped coordinate set (s=1) or cleared (s=0).
class HypercubeReducedKernel {
 public:
  explicit HypercubeReducedKernel(int m) : m_(m) {
    if (m < 1) throw std::invalid_argument("m >= 1 required");
  }

  // Profiles for t = 0..t_max.
  std::vector<WeightProfile> profiles(int t_max) const {
    if (m_ == 1 && t_max >= 2)
      throw std::invalid_argument("m=1 supports at most one NBRW step");
    std::vector<WeightProfile> out;
    out.reserve(t_max + 1);
    WeightProfile p0(m_ + 1, 0.0);
    p0[0] = 1.0;
    out.push_back(p0);
    if (t_max == 0) return out;

    // After the first step the walk is at weight 1 and the flipped bit is set.
    std::vector<double> set(m_ + 1, 0.0), clr(m_ + 1, 0.0);
    set[1] = 1.0;
    out.push_back(profile_of(set, clr));
    const double inv = m_ > 1 ? 1.0 / static_cast<double>(m_ - 1) : 0.0;
    std::vector<double> nset(m_ + 1), nclr(m_ + 1);
    for (int t = 2; t <= t_max; ++t) {
      std::fill(nset.begin(), nset.end(), 0.0);
      std::fill(nclr.begin(), nclr.end(), 0.0);
      for (int k = 0; k <= m_; ++k) {
        // From (k, set): k-1 flippable set bits, m-k flippable clear bits.
        if (set[k] != 0.0) {
          if (k >= 1) nclr[k - 1] += set[k] * static_cast<double>(k - 1) * inv;
          if (k + 1 <= m_)
            nset[k + 1] += set[k] * static_cast<double>(m_ - k) * inv;
        }
        // From (k, clear): k flippable set bits, m-k-1 flippable clear bits.
        if (clr[k] != 0.0) {
          if (k >= 1) nclr[k - 1] += clr[k] * static_cast<double>(k) * inv;
          if (k + 1 <= m_)
            nset[k + 1] += clr[k] * static_cast<double>(m_ - k - 1) * inv;
        }
      }
      set.swap(nset);
      clr.swap(nclr);
      out.push_back(profile_of(set, clr));
    }
    return out;
  }

 private:
  WeightProfile profile_of(const std::vector<double>& set,
                           const std::vector<double>& clr) const {
    WeightProfile p(m_ + 1, 0.0);
    for (int k = 0; k <= m_; ++k) p[k] = set[k] + clr[k];
    return p;
  }

  int m_;
};

// Full directed-edge DP from a fixed start vertex (or initial vertex mass).
// State: mass[v * m + slot] = probability of being at v having arrived via
// neighbor slot `slot` (the reverse move is forbidden).
class DirectedEdgeKernel {
 public:
  explicit DirectedEdgeKernel(const TransitiveGraph& g) : g_(g) {
    const double states =
        static_cast<double>(g.vertex_count()) * g.degree();
    if (states > 1e8)
      throw std::invalid_argument("directed-edge DP: V*m exceeds 1e8 states");
    // slot_back[v][i]: slot of v inside the adjacency of neighbor(v, i).
    const Vertex V = g_.vertex_count();
    const int m = g_.degree();
    slot_back_.assign(static_cast<std::size_t>(V) * m, 0);
    for (Vertex v = 0; v < V; ++v) {
      for (int i = 0; i < m; ++i) {
        const Vertex u = g_.neighbor(v, i);
        int back = -1;
        for (int j = 0; j < m; ++j)
          if (g_.neighbor(u, j) == v) {
            back = j;
            break;
          }
        if (back < 0) throw std::invalid_argument("asymmetric adjacency");
        slot_back_[static_cast<std::size_t>(v) * m + i] =
            static_cast<std::uint32_t>(back);
      }
    }
  }

  // Distributions p^t(start, .) for t = 0..t_max.
  std::vector<std::vector<double>> distributions(Vertex start, int t_max) const {
    g_.check_vertex(start);
    const Vertex V = g_.vertex_count();
    const int m = g_.degree();
    if (m == 1 && t_max >= 2)
      throw std::invalid_argument("m=1 supports at most one NBRW step");
    std::vector<std::vector<double>> out;
    out.reserve(t_max + 1);
    std::vector<double> d0(V, 0.0);
    d0[start] = 1.0;
    out.push_back(d0);
    if (t_max == 0) return out;

    std::vector<double> mass(static_cast<std::size_t>(V) * m, 0.0);
    for (int i = 0; i < m; ++i) {
      const Vertex u = g_.neighbor(start, i);
      mass[static_cast<std::size_t>(u) * m +
           slot_back_[static_cast<std::size_t>(start) * m + i]] =
          1.0 / static_cast<double>(m);
    }
    out.push_back(collapse(mass));
    const double inv = 1.0 / static_cast<double>(m - 1);
    std::vector<double> next(mass.size());
    for (int t = 2; t <= t_max; ++t) {
      std::fill(next.begin(), next.end(), 0.0);
      for (Vertex v = 0; v < V; ++v) {
        for (int arr = 0; arr < m; ++arr) {
          const double w = mass[static_cast<std::size_t>(v) * m + arr];
          if (w == 0.0) continue;
          const double share = w * inv;
          for (int i = 0; i < m; ++i) {
            if (i == arr) continue;  // would traverse the arrival edge back
            const Vertex u = g_.neighbor(v, i);
            next[static_cast<std::size_t>(u) * m +
                 slot_back_[static_cast<std::size_t>(v) * m + i]] += share;
          }
        }
      }
      mass.swap(next);
      out.push_back(collapse(mass));
    }
    return out;
  }

 private:
  std::vector<double> collapse(const std::vector<double>& mass) const {
    const Vertex V = g_.vertex_count();
    const int m = g_.degree();
    std::vector<double> d(V, 0.0);
    for (Vertex v = 0; v < V; ++v) {
      double s = 0.0;
      for (int i = 0; i < m; ++i) s += mass[static_cast<std::size_t>(v) * m + i];
      d[v] = s;
    }
    return d;
  }

  const TransitiveGraph& g_;
  std::vector<std::uint32_t> slot_back_;
};

// p^t(u, .) as a sparse map, using the cheapest valid representation.
inline std::map<Vertex, double> nbrw_distribution(const TransitiveGraph& g,
                                                  Vertex u, int t) {
  g.check_vertex(u);
  if (t < 0) throw std::invalid_argument("t >= 0 required");
  if (g.degree() == 1 && t >= 2)
    throw std::invalid_argument("m=1 supports at most one NBRW step");
  std::map<Vertex, double> out;
  if (g.is_hypercube()) {
    const int m = g.degree();
    const auto binom = binomial_table(m);
    const auto prof = HypercubeReducedKernel(m).profiles(t);
    for (Vertex z = 0; z < g.vertex_count(); ++z) {
      const int k = static_cast<int>(__builtin_popcountll(u ^ z));
      const double p = prof[t][k] / binom[m][k];
      if (p > 0.0) out[z] = p;
    }
    return out;
  }
  const auto dists = DirectedEdgeKernel(g).distributions(u, t);
  for (Vertex z = 0; z < g.vertex_count(); ++z)
    if (dists[t][z] > 0.0) out[z] = dists[t][z];
  return out;
}

// Least t <= t_max with max_y (p^t(x,y) + p^{t+1}(x,y))/2 <= (1+xi)/V,
// computed from a single start by transitivity. Returns t_max + 1 when no
// such t exists. m=1 is degenerate (no second NBRW step) and returns 1.
inline int mixing_time(const TransitiveGraph& g, double xi, int t_max) {
  if (xi <= 0.0) throw std::invalid_argument("xi > 0 required");
  if (t_max < 1) throw std::invalid_argument("t_max >= 1 required");
  if (g.degree() == 1) return 1;
  const double bound =
      (1.0 + xi) / static_cast<double>(g.vertex_count());
  if (g.is_hypercube()) {
    const int m = g.degree();
    const auto binom = binomial_table(m);
    const auto prof = HypercubeReducedKernel(m).profiles(t_max + 1);
    for (int t = 1; t <= t_max; ++t) {
      double worst = 0.0;
      for (int k = 0; k <= m; ++k)
        worst = std::max(worst,
                         0.5 * (prof[t][k] + prof[t + 1][k]) / binom[m][k]);
      if (worst <= bound) return t;
    }
    return t_max + 1;
  }
  const auto dists = DirectedEdgeKernel(g).distributions(0, t_max + 1);
  for (int t = 1; t <= t_max; ++t) {
    double worst = 0.0;
    for (Vertex z = 0; z < g.vertex_count(); ++z)
      worst = std::max(worst, 0.5 * (dists[t][z] + dists[t + 1][z]));
    if (worst <= bound) return t;
  }
  return t_max + 1;
}

namespace detail {

// XOR-convolution of two weight-symmetric functions on {0,1}^m, in the
// profile representation (profile[k] = total mass at weight k).
inline WeightProfile convolve_profiles(const WeightProfile& a,
                                       const WeightProfile& b,
                                       const std::vector<std::vector<double>>& binom,
                                       int m) {
  WeightProfile out(m + 1, 0.0);
  for (int k = 0; k <= m; ++k) {
    double acc = 0.0;
    for (int aw = 0; aw <= m; ++aw) {
      if (a[aw] == 0.0) continue;
      const double fa = a[aw] / binom[m][aw];
      const int ilo = std::max(0, aw + k - m);
      const int ihi = std::min(k, aw);
      for (int i = ilo; i <= ihi; ++i) {
        const int bw = k + aw - 2 * i;
        if (b[bw] == 0.0) continue;
        acc += fa * (b[bw] / binom[m][bw]) * binom[k][i] * binom[m - k][aw - i];
      }
    }
    out[k] = acc * binom[m][k];
  }
  return out;
}

}  // namespace detail

// Triangle diagram (sum over u,v of chained NBRW kernels with each leg
// bounded by m0 steps and total length at least 3), evaluated by iterated
// kernel application. Hypercube inputs use the weight-profile convolution,
// everything else chains the directed-edge DP over vertex masses.
inline double triangle_diagram_rw(const TransitiveGraph& g, Vertex x, Vertex y,
                                  int m0) {
  if (m0 < 1) throw std::invalid_argument("m0 >= 1 required");
  g.check_vertex(x);
  g.check_vertex(y);
  if (g.is_hypercube()) {
    const int m = g.degree();
    const auto binom = binomial_table(m);
    const auto prof = HypercubeReducedKernel(m).profiles(m0);
    WeightProfile total(m + 1, 0.0);
    for (int t = 0; t <= m0; ++t)
      for (int k = 0; k <= m; ++k) total[k] += prof[t][k];
    const int kxy = static_cast<int>(__builtin_popcountll(x ^ y));
    const auto full2 = detail::convolve_profiles(total, total, binom, m);
    const auto full3 = detail::convolve_profiles(full2, total, binom, m);
    double result = full3[kxy] / binom[m][kxy];
    // Remove the short terms t1+t2+t3 <= 2.
    for (int t1 = 0; t1 <= std::min(2, m0); ++t1)
      for (int t2 = 0; t2 + t1 <= 2 && t2 <= m0; ++t2)
        for (int t3 = 0; t1 + t2 + t3 <= 2 && t3 <= m0; ++t3) {
          const auto c2 =
              detail::convolve_profiles(prof[t1], prof[t2], binom, m);
          const auto c3 = detail::convolve_profiles(c2, prof[t3], binom, m);
          result -= c3[kxy] / binom[m][kxy];
        }
    return result;
  }

  // General graphs: r <- sum_t P^t applied three times to e_x, minus the
  // short terms. P^t rows are NBRW distributions started from each vertex,
  // so one application is a directed-edge DP with vertex-mass input.
  const Vertex V = g.vertex_count();
  DirectedEdgeKernel kernel(g);
  auto apply_sum = [&](const std::vector<double>& in, int t_lo,
                       int t_hi) {
    std::vector<double> acc(V, 0.0);
    for (Vertex u = 0; u < V; ++u) {
      if (in[u] == 0.0) continue;
      const auto dists = kernel.distributions(u, t_hi);
      for (int t = t_lo; t <= t_hi; ++t)
        for (Vertex z = 0; z < V; ++z) acc[z] += in[u] * dists[t][z];
    }
    return acc;
  };
  std::vector<double> ex(V, 0.0);
  ex[x] = 1.0;
  const auto r1 = apply_sum(ex, 0, m0);
  const auto r2 = apply_sum(r1, 0, m0);
  const auto r3 = apply_sum(r2, 0, m0);
  double result = r3[y];
  auto chain3 = [&](int t1, int t2, int t3) {
    const auto a = apply_sum(ex, t1, t1);
    const auto b = apply_sum(a, t2, t2);
    const auto c = apply_sum(b, t3, t3);
    return c[y];
  };
  for (int t1 = 0; t1 <= std::min(2, m0); ++t1)
    for (int t2 = 0; t2 + t1 <= 2 && t2 <= m0; ++t2)
      for (int t3 = 0; t1 + t2 + t3 <= 2 && t3 <= m0; ++t3)
        result -= chain3(t1, t2, t3);
  return result;
}

}  // namespace percolab::nbrw
