#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "percolab/mmspace.hpp"
#include "percolab/rng.hpp"
#include "percolab/stats.hpp"

using namespace percolab;
using mmspace::FiniteMMSpace;

namespace {

// random points in the plane give a genuine metric
FiniteMMSpace random_euclidean_space(std::size_t k, std::uint64_t seed,
                                     double mass_scale = 1.0) {
  std::vector<double> xs(k), ys(k), masses(k);
  for (std::size_t i = 0; i < k; ++i) {
    xs[i] = rng::uniform(seed, rng::kGeneric, 3 * i);
    ys[i] = rng::uniform(seed, rng::kGeneric, 3 * i + 1);
    masses[i] =
        mass_scale * (0.1 + rng::uniform(seed, rng::kGeneric, 3 * i + 2));
  }
  std::vector<double> dist(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      dist[i * k + j] = std::hypot(xs[i] - xs[j], ys[i] - ys[j]);
  return FiniteMMSpace::from_matrix(std::move(masses), std::move(dist));
}

FiniteMMSpace one_point(double mass) {
  return FiniteMMSpace::from_matrix({mass}, {0.0});
}

FiniteMMSpace two_points(double d, double m1, double m2) {
  return FiniteMMSpace::from_matrix({m1, m2}, {0.0, d, d, 0.0});
}

}  // namespace

TEST_CASE("space file round trip", "[mmspace]") {
  std::stringstream ss;
  ss << "3\n1.0\n0.5\n0.25\n\n1.0\n2.0 1.5\n";
  const auto s = mmspace::read_space(ss);
  REQUIRE(s.k == 3);
  CHECK(s.d(1, 0) == 1.0);
  CHECK(s.d(2, 0) == 2.0);
  CHECK(s.d(2, 1) == 1.5);
  CHECK(s.total_mass() == Catch::Approx(1.75));
}

TEST_CASE("hausdorff basics and oracle", "[mmspace]") {
  // path 0-1-2 with unit edges
  const auto path = FiniteMMSpace::from_matrix(
      {1.0, 1.0, 1.0}, {0, 1, 2, 1, 0, 1, 2, 1, 0});
  CHECK(mmspace::hausdorff(path, {0}, {2}) == 2.0);
  CHECK(mmspace::hausdorff(path, {0, 1, 2}, {0, 1, 2}) == 0.0);
  CHECK_THROWS_AS(mmspace::hausdorff(path, {}, {0}), std::invalid_argument);

  // random subsets of random metrics against the definitional loop
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto space = random_euclidean_space(8, 100 + seed);
    std::vector<std::size_t> a, b;
    for (std::size_t i = 0; i < 8; ++i) {
      if (rng::uniform(seed, rng::kSampling, i) < 0.5) a.push_back(i);
      if (rng::uniform(seed, rng::kSampling, 100 + i) < 0.5) b.push_back(i);
    }
    if (a.empty()) a.push_back(0);
    if (b.empty()) b.push_back(7);
    double expect = 0.0;
    for (std::size_t x : a) {
      double best = 1e18;
      for (std::size_t y : b) best = std::min(best, space.d(x, y));
      expect = std::max(expect, best);
    }
    for (std::size_t y : b) {
      double best = 1e18;
      for (std::size_t x : a) best = std::min(best, space.d(x, y));
      expect = std::max(expect, best);
    }
    CHECK(mmspace::hausdorff(space, a, b) == Catch::Approx(expect));
  }
}

TEST_CASE("prokhorov basics", "[mmspace]") {
  const auto pair = two_points(0.3, 1.0, 1.0);
  // identical measures
  CHECK(mmspace::prokhorov(pair, {0.4, 0.6}, {0.4, 0.6}) == 0.0);
  // two unit point masses at distance 0.3
  const double d =
      mmspace::prokhorov(pair, {1.0, 0.0}, {0.0, 1.0}, 1e-6);
  CHECK(d == Catch::Approx(0.3).margin(1e-5));
  // at distance 3 the mass transport saturates at epsilon = 1
  const auto far = two_points(3.0, 1.0, 1.0);
  const double dfar =
      mmspace::prokhorov(far, {1.0, 0.0}, {0.0, 1.0}, 1e-6);
  CHECK(dfar == Catch::Approx(1.0).margin(1e-5));
}

TEST_CASE("prokhorov: subset enumeration equals max-flow", "[mmspace]") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto space = random_euclidean_space(6, 500 + seed);
    std::vector<double> mu(6), nu(6);
    for (std::size_t i = 0; i < 6; ++i) {
      mu[i] = rng::uniform(seed, rng::kGeneric, i);
      nu[i] = rng::uniform(seed, rng::kGeneric, 50 + i);
    }
    const double grid = 1e-5;
    const double a = mmspace::prokhorov(space, mu, nu, grid,
                                        mmspace::ProkhorovMethod::kSubsets);
    const double b = mmspace::prokhorov(space, mu, nu, grid,
                                        mmspace::ProkhorovMethod::kFlow);
    CHECK(std::abs(a - b) <= 2.0 * grid + 1e-12);
    // sanity envelope: never above max(mass gap, max distance)
    const double gap = std::abs(std::accumulate(mu.begin(), mu.end(), 0.0) -
                                std::accumulate(nu.begin(), nu.end(), 0.0));
    CHECK(a <= std::max(gap, space.diameter()) + grid);
  }
}

TEST_CASE("prokhorov caps", "[mmspace]") {
  const auto big = random_euclidean_space(16, 9);
  CHECK_THROWS_AS(mmspace::prokhorov(big, big.masses, big.masses, 1e-4,
                                     mmspace::ProkhorovMethod::kSubsets),
                  std::invalid_argument);
}

TEST_CASE("gp distance matrix basics", "[mmspace]") {
  const auto single = one_point(2.0);
  const auto mat = mmspace::gp_distance_matrix(single, 5, 3);
  for (double x : mat) CHECK(x == 0.0);

  // two-point space, equal masses, distance L: off-diagonal equals L with
  // probability exactly 1/2
  const double L = 0.7;
  const auto pair = two_points(L, 1.0, 1.0);
  std::size_t hits = 0;
  const std::size_t n = 20000;
  for (std::size_t i = 0; i < n; ++i) {
    const auto m = mmspace::gp_distance_matrix(pair, 2, 1000 + i);
    if (m[1] == L) ++hits;
  }
  const double freq = static_cast<double>(hits) / n;
  CHECK(std::abs(freq - 0.5) <= 3.0 * std::sqrt(0.25 / n));

  CHECK_THROWS_AS(
      mmspace::gp_distance_matrix(
          FiniteMMSpace::from_matrix({0.0}, {0.0}), 2, 1),
      std::invalid_argument);
}

TEST_CASE("gp sampling is relabeling invariant", "[mmspace]") {
  // permuting the points leaves the sampled off-diagonal law unchanged
  const auto space = random_euclidean_space(5, 77);
  FiniteMMSpace permuted;
  const std::vector<std::size_t> perm{3, 0, 4, 2, 1};
  permuted.k = 5;
  permuted.masses.resize(5);
  permuted.dist.assign(25, 0.0);
  for (std::size_t i = 0; i < 5; ++i) {
    permuted.masses[i] = space.masses[perm[i]];
    for (std::size_t j = 0; j < 5; ++j)
      permuted.dist[i * 5 + j] = space.d(perm[i], perm[j]);
  }
  std::vector<double> a, b;
  for (std::size_t i = 0; i < 4000; ++i) {
    a.push_back(mmspace::gp_distance_matrix(space, 2, 10000 + i)[1]);
    b.push_back(mmspace::gp_distance_matrix(permuted, 2, 20000 + i)[1]);
  }
  CHECK(stats::ks_permutation_test(a, b, 500, 3).p_value > 0.01);
}

TEST_CASE("ghp identity and one-point mass gap", "[mmspace]") {
  const auto x = random_euclidean_space(4, 31);
  CHECK(mmspace::ghp_bruteforce(x, x) == 0.0);

  // one-point spaces with masses 1 and 2: distance is the mass gap
  CHECK(mmspace::ghp_bruteforce(one_point(1.0), one_point(2.0)) ==
        Catch::Approx(1.0).margin(1e-3));
  // empty vs one-point: diam + mass tail bound
  FiniteMMSpace empty;
  CHECK(mmspace::ghp_bruteforce(one_point(1.0), empty) == Catch::Approx(1.0));
}

TEST_CASE("ghp splitting a point is cheap when the split is tight",
          "[mmspace]") {
  const auto x = one_point(1.0);
  double prev = 1e18;
  for (double eps0 : {0.4, 0.2, 0.1, 0.05}) {
    const double d =
        mmspace::ghp_bruteforce(x, two_points(2.0 * eps0, 0.5, 0.5), 1e-4);
    CHECK(d <= prev + 1e-9);
    prev = d;
  }
  CHECK(prev <= 0.06);
}

TEST_CASE("ghp symmetry and triangle on toy spaces", "[mmspace]") {
  const double grid = 1e-3;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto x = random_euclidean_space(2 + seed % 2, 600 + seed);
    const auto y = random_euclidean_space(3, 700 + seed);
    const auto z = random_euclidean_space(2, 800 + seed);
    const double xy = mmspace::ghp_bruteforce(x, y, grid);
    const double yx = mmspace::ghp_bruteforce(y, x, grid);
    CHECK(xy == Catch::Approx(yx).margin(2.0 * grid));
    const double xz = mmspace::ghp_bruteforce(x, z, grid);
    const double yz = mmspace::ghp_bruteforce(y, z, grid);
    CHECK(xz <= xy + yz + 2.0 * grid);
  }
}

TEST_CASE("l4 sequence metric", "[mmspace]") {
  const auto a = random_euclidean_space(3, 41);
  const auto b = random_euclidean_space(2, 42);
  // identical sequences: zero
  const auto same = mmspace::l4_sequence_distance({a, b}, {a, b});
  CHECK(same.value == 0.0);
  CHECK_FALSE(same.used_proxy);
  // single point of mass 1 against the empty sequence: proxy bound 1
  const auto padded = mmspace::l4_sequence_distance({one_point(1.0)}, {});
  CHECK(padded.value == Catch::Approx(1.0));
  // recomputation identity on a two-term aggregate
  const auto once = mmspace::l4_sequence_distance({a, b}, {b, a}, 1e-3);
  const auto twice = mmspace::l4_sequence_distance({a, b}, {b, a}, 1e-3);
  CHECK(once.value == twice.value);
  const double t1 = mmspace::ghp_bruteforce(a, b, 1e-3);
  const double t2 = mmspace::ghp_bruteforce(b, a, 1e-3);
  CHECK(once.value ==
        Catch::Approx(std::pow(t1 * t1 * t1 * t1 + t2 * t2 * t2 * t2, 0.25))
            .margin(1e-6));
}

TEST_CASE("from_component builds scaled graph spaces", "[mmspace]") {
  const auto g = TransitiveGraph::hypercube(2);
  // find a seed whose uniforms put the path 00-01-11 strictly below the
  // other two edges, then percolate between the two levels
  for (std::uint64_t seed = 0;; ++seed) {
    PercolationSample s(g, seed);
    const double u1 = s.edge_uniform(0b00, 0);  // 00-01
    const double u2 = s.edge_uniform(0b01, 1);  // 01-11
    const double u3 = s.edge_uniform(0b00, 1);  // 00-10
    const double u4 = s.edge_uniform(0b10, 0);  // 10-11
    const double path_max = std::max(u1, u2);
    const double rest_min = std::min(u3, u4);
    if (path_max < rest_min) {
      const double p = 0.5 * (path_max + rest_min);
      const double v13 = std::cbrt(4.0);
      const auto cs = mmspace::from_component(
          s, p, {0b00, 0b01, 0b11}, 1.0 / v13, std::pow(4.0, -2.0 / 3.0));
      const auto space = cs.materialize();
      REQUIRE(space.k == 3);
      // distances (1,1,2) scaled by V^{-1/3}
      std::vector<double> off{space.d(0, 1), space.d(1, 2), space.d(0, 2)};
      std::sort(off.begin(), off.end());
      CHECK(off[0] == Catch::Approx(1.0 / v13));
      CHECK(off[1] == Catch::Approx(1.0 / v13));
      CHECK(off[2] == Catch::Approx(2.0 / v13));
      CHECK(space.total_mass() ==
            Catch::Approx(3.0 * std::pow(4.0, -2.0 / 3.0)));
      break;
    }
    REQUIRE(seed < 1000);  // the pattern has probability 1/6 per seed
  }
}

TEST_CASE("component space mass matches percolation stats", "[mmspace]") {
  const auto g = TransitiveGraph::hypercube(8);
  PercolationSample s(g, 3131);
  const double p = 1.0 / 7.0;
  auto uf = s.components(p);
  const auto ids = uf.component_ids();
  std::map<std::uint32_t, std::vector<Vertex>> groups;
  for (Vertex v = 0; v < g.vertex_count(); ++v) groups[ids[v]].push_back(v);
  const auto largest = std::max_element(
      groups.begin(), groups.end(), [](const auto& a, const auto& b) {
        return a.second.size() < b.second.size();
      });
  const double v23 = std::pow(256.0, -2.0 / 3.0);
  const auto cs =
      mmspace::from_component(s, p, largest->second, 1.0, v23);
  const auto st = percolate(s, p);
  CHECK(cs.total_mass() ==
        Catch::Approx(static_cast<double>(st.sizes.front()) * v23));
}

TEST_CASE("mm sequence summaries", "[mmspace]") {
  mmspace::MMSequence seq;
  seq.spaces.push_back(one_point(2.0));
  seq.spaces.push_back(two_points(3.0, 1.0, 1.0));
  CHECK(seq.mass_l4() == Catch::Approx(std::pow(16.0 + 16.0, 0.25)));
  CHECK(seq.diam_l4() == Catch::Approx(3.0));
  CHECK(mmspace::l4_sequence_distance(seq, seq).value == 0.0);
}
