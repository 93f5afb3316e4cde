#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include "oracles.hpp"
#include "percolab/percolation.hpp"

using namespace percolab;

namespace {

// exact diameter of every component by BFS from every vertex
std::map<std::uint64_t, std::uint32_t> exact_diameters(
    const PercolationSample& s, double p) {
  const auto& g = s.graph();
  const Vertex V = g.vertex_count();
  UnionFind uf = s.components(p);
  std::map<std::uint64_t, std::uint32_t> diam;  // root -> diameter
  for (Vertex v = 0; v < V; ++v) {
    std::map<Vertex, std::uint32_t> dist;
    dist[v] = 0;
    std::vector<Vertex> frontier{v};
    std::uint32_t depth = 0;
    while (!frontier.empty()) {
      std::vector<Vertex> next;
      for (Vertex x : frontier)
        for (int i = 0; i < g.degree(); ++i) {
          if (!s.edge_open(x, i, p)) continue;
          const Vertex y = g.neighbor(x, i);
          if (dist.emplace(y, depth + 1).second) next.push_back(y);
        }
      if (!next.empty()) ++depth;
      frontier.swap(next);
    }
    const auto root = uf.find(static_cast<std::uint32_t>(v));
    auto& entry = diam[root];
    entry = std::max(entry, depth);
  }
  return diam;
}

}  // namespace

TEST_CASE("percolate endpoints", "[percolation]") {
  const auto g2 = TransitiveGraph::hypercube(2);
  PercolationSample s2(g2, 42);
  const auto full = percolate(s2, 1.0);
  REQUIRE(full.sizes == std::vector<std::uint64_t>{4});

  const auto g3 = TransitiveGraph::hypercube(3);
  PercolationSample s3(g3, 42);
  const auto empty = percolate(s3, 0.0);
  REQUIRE(empty.sizes.size() == 8);
  for (auto sz : empty.sizes) CHECK(sz == 1);
}

TEST_CASE("component sizes sum to V and are sorted", "[percolation]") {
  const auto g = TransitiveGraph::hypercube(9);
  for (std::uint64_t seed : {1ull, 77ull, 901ull}) {
    PercolationSample s(g, seed);
    for (double p : {0.05, 0.11, 0.2, 0.6}) {
      const auto st = percolate(s, p);
      std::uint64_t total = 0;
      for (std::size_t i = 0; i < st.sizes.size(); ++i) {
        total += st.sizes[i];
        if (i) CHECK(st.sizes[i] <= st.sizes[i - 1]);
      }
      CHECK(total == g.vertex_count());
    }
  }
}

TEST_CASE("reproducibility: identical seed gives identical components",
          "[percolation]") {
  const auto g = TransitiveGraph::hypercube(10);
  PercolationSample a(g, 1234), b(g, 1234), c(g, 1235);
  const auto sa = percolate(a, 0.1).sizes;
  const auto sb = percolate(b, 0.1).sizes;
  CHECK(sa == sb);
  CHECK(percolate(c, 0.1).sizes != sa);  // different seed, different world
}

TEST_CASE("monotone coupling: p1-partition refines p2-partition",
          "[percolation]") {
  const auto g = TransitiveGraph::hypercube(8);
  for (std::uint64_t seed : {3ull, 9ull}) {
    PercolationSample s(g, seed);
    auto ids_lo = s.components(0.08).component_ids();
    auto ids_hi = s.components(0.16).component_ids();
    std::map<std::uint32_t, std::uint32_t> image;
    for (Vertex v = 0; v < g.vertex_count(); ++v) {
      const auto [it, fresh] = image.emplace(ids_lo[v], ids_hi[v]);
      CHECK(it->second == ids_hi[v]);  // whole lo-class lands in one hi-class
      (void)fresh;
    }
  }
}

TEST_CASE("exhaustive oracle at m=3, p=1/2", "[percolation]") {
  const auto g = TransitiveGraph::hypercube(3);
  const auto exact = oracles::exhaustive_percolation(g, 0.5, 4);

  const std::size_t n = 20000;
  double sum_c0 = 0.0, sum_c0_sq = 0.0;
  double sum_c1 = 0.0, sum_c1_sq = 0.0;
  double hits = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    PercolationSample s(g, rng::derive(2024, rng::kSampling, i));
    const auto st = percolate(s, 0.5);
    const double c1 = static_cast<double>(st.sizes.front());
    const double c0 = static_cast<double>(s.cluster_size(0.5, 0));
    sum_c0 += c0;
    sum_c0_sq += c0 * c0;
    sum_c1 += c1;
    sum_c1_sq += c1 * c1;
    if (c0 >= 4.0) hits += 1.0;
  }
  const double nd = static_cast<double>(n);
  const double mean_c0 = sum_c0 / nd;
  const double se_c0 = std::sqrt((sum_c0_sq / nd - mean_c0 * mean_c0) / nd);
  CHECK(std::abs(mean_c0 - exact.mean_cluster_at_v0) <= 3.0 * se_c0);
  const double mean_c1 = sum_c1 / nd;
  const double se_c1 = std::sqrt((sum_c1_sq / nd - mean_c1 * mean_c1) / nd);
  CHECK(std::abs(mean_c1 - exact.mean_largest) <= 3.0 * se_c1);
  const double phat = hits / nd;
  const double se_p = std::sqrt(phat * (1.0 - phat) / nd);
  CHECK(std::abs(phat - exact.prob_cluster_at_least) <= 3.0 * se_p);
}

TEST_CASE("susceptibility endpoints and oracle", "[percolation]") {
  const auto g = TransitiveGraph::hypercube(3);
  CHECK(susceptibility(g, 0.0, 50, 7).mean == Catch::Approx(1.0));
  CHECK(susceptibility(g, 1.0, 50, 7).mean == Catch::Approx(8.0));

  const auto exact = oracles::exhaustive_percolation(g, 0.5, 4);
  const auto est = susceptibility(g, 0.5, 20000, 99);
  CHECK(std::abs(est.mean - exact.mean_cluster_at_v0) <= 3.0 * est.stderr_);
}

TEST_CASE("ball contract", "[percolation]") {
  const auto g = TransitiveGraph::hypercube(3);
  PercolationSample s(g, 5);
  // p = 1: the full cube
  CHECK(s.ball(1.0, 0, 0) == std::make_pair(std::uint64_t{1}, true));
  CHECK(s.ball(1.0, 0, 1) == std::make_pair(std::uint64_t{4}, true));
  CHECK(s.ball(1.0, 0, 3) == std::make_pair(std::uint64_t{8}, true));
  CHECK(s.ball(1.0, 0, 4) == std::make_pair(std::uint64_t{8}, false));
  // p = 0: singleton balls, boundary only at r=0
  CHECK(s.ball(0.0, 3, 0) == std::make_pair(std::uint64_t{1}, true));
  CHECK(s.ball(0.0, 3, 2) == std::make_pair(std::uint64_t{1}, false));
}

TEST_CASE("long_thin_scan endpoints", "[percolation]") {
  const int m = 6;
  const auto g = TransitiveGraph::hypercube(m);
  PercolationSample s(g, 11);
  // p=1: every ball of radius diam has a boundary and size <= V
  const auto all = long_thin_scan(s, 1.0, m, g.vertex_count());
  CHECK(all.count == g.vertex_count());
  // p=0: B(v,1) = {v}, no vertex at distance exactly 1
  const auto none = long_thin_scan(s, 0.0, 1, 1);
  CHECK(none.count == 0);
}

TEST_CASE("long_thin_scan monotone in the ball-size cutoff", "[percolation]") {
  const int m = 14;
  const auto g = TransitiveGraph::hypercube(m);
  const double V = static_cast<double>(g.vertex_count());
  const double p = 1.0 / (m - 1);  // near-critical
  const int R = std::max(1, static_cast<int>(0.25 * std::cbrt(V)));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    PercolationSample s(g, rng::derive(31, rng::kSampling, seed));
    std::uint64_t prev = 0;
    for (double eps : {0.02, 0.1, 0.5, 1.0}) {
      const std::uint64_t M = std::max<std::uint64_t>(
          1, static_cast<std::uint64_t>(eps * std::pow(0.25, 2.5) *
                                        std::pow(V, 2.0 / 3.0)));
      const auto scan = long_thin_scan(s, p, R, M);
      CHECK(scan.count >= prev);
      prev = scan.count;
    }
  }
}

TEST_CASE("tail_and_l4 endpoints", "[percolation]") {
  const auto g = TransitiveGraph::hypercube(4);
  PercolationSample s(g, 17);
  const double V = static_cast<double>(g.vertex_count());
  const auto empty = percolate(s, 0.0, true);
  const auto [s4_0, d4_0] = tail_and_l4_stats(empty, 1);
  CHECK(s4_0 == Catch::Approx(V / std::pow(V, 8.0 / 3.0)));
  CHECK(d4_0 == 0.0);
  const auto full = percolate(s, 1.0, true);
  const auto [s4_1, d4_1] = tail_and_l4_stats(full, 2);
  CHECK(s4_1 == 0.0);
  CHECK(d4_1 == 0.0);
  CHECK(tail_and_l4_stats(full, 99) == std::make_pair(0.0, 0.0));
}

TEST_CASE("tail sums decrease in the rank cutoff", "[percolation]") {
  const int m = 10;
  const auto g = TransitiveGraph::hypercube(m);
  PercolationSample s(g, 23);
  const auto st = percolate(s, 1.0 / (m - 1), true);
  double prev_s = 1e300, prev_d = 1e300;
  for (std::size_t k : {1, 2, 5, 10}) {
    const auto [s4, d4] = tail_and_l4_stats(st, k);
    CHECK(s4 <= prev_s);
    CHECK(d4 <= prev_d);
    prev_s = s4;
    prev_d = d4;
  }
}

TEST_CASE("diameter scheme matches full BFS", "[percolation]") {
  const int m = 12;
  const auto g = TransitiveGraph::hypercube(m);
  const double p = 1.0 / (m - 1);
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    PercolationSample s(g, seed);
    const auto st = percolate(s, p, true);
    const auto exact = exact_diameters(s, p);
    std::vector<std::uint32_t> got(st.diameters.begin(), st.diameters.end());
    std::vector<std::uint32_t> want;
    for (const auto& [root, d] : exact) want.push_back(d);
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) REQUIRE(got[i] == want[i]);
  }
}

TEST_CASE("cluster tail diagnostic at slightly subcritical p",
          "[percolation]") {
  // sup_k P(|C| >= k) sqrt(k) is the claim; reported for the record.
  const int m = 12;
  const auto g = TransitiveGraph::hypercube(m);
  const double p = 0.9 / (m - 1);
  const std::size_t n = 4000;
  std::vector<double> sizes;
  for (std::size_t i = 0; i < n; ++i) {
    PercolationSample s(g, rng::derive(55, rng::kSampling, i));
    sizes.push_back(static_cast<double>(s.cluster_size(p, 0)));
  }
  std::sort(sizes.begin(), sizes.end());
  double worst = 0.0;
  for (std::uint64_t k : {1, 2, 4, 8, 16, 32, 64, 128}) {
    const auto it =
        std::lower_bound(sizes.begin(), sizes.end(), static_cast<double>(k));
    const double tail =
        static_cast<double>(sizes.end() - it) / static_cast<double>(n);
    worst = std::max(worst, tail * std::sqrt(static_cast<double>(k)));
  }
  WARN("cluster tail sup_k P(|C|>=k) sqrt(k) ~ " << worst);
  CHECK(worst < 10.0);  // generous sanity envelope
}
