#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "percolab/limit_oracle.hpp"
#include "percolab/multiplicative.hpp"
#include "percolab/rng.hpp"
#include "percolab/stats.hpp"

using namespace percolab;
using mult::WeightVector;

namespace {

// label the 5 partitions of {0,1,2}: 0..2 = pair{i} absent..; encode by
// sorted members signature
int partition_category(const mult::ComponentPartition& part) {
  if (part.weights.size() == 3) return 0;             // 1|2|3
  if (part.weights.size() == 1) return 4;             // 123
  // one pair + singleton; identify the singleton
  const auto& lone =
      part.members[0].size() == 1 ? part.members[0] : part.members[1];
  return 1 + static_cast<int>(lone[0]);               // 1: {0} alone, ...
}

std::vector<double> exact_three_probs(double q) {
  const double p = -std::expm1(-q);
  const double nq = std::exp(-q);
  const double singles = nq * nq * nq;
  const double pair = p * nq * nq;  // a fixed pair together, third alone
  return {singles, pair, pair, pair, 1.0 - singles - 3.0 * pair};
}

}  // namespace

TEST_CASE("direct sampler endpoints", "[multiplicative]") {
  WeightVector lonely({2.5}, 1.0);
  const auto one = mult::sample_direct(lonely, 3);
  REQUIRE(one.weights == std::vector<double>{2.5});

  WeightVector frozen({1.0, 2.0, 0.5}, 0.0);
  const auto iso = mult::sample_direct(frozen, 3);
  REQUIRE(iso.weights.size() == 3);
  CHECK(iso.weights == std::vector<double>{2.0, 1.0, 0.5});
}

TEST_CASE("two-vertex closed form", "[multiplicative]") {
  const double q = 0.7;
  WeightVector wv({1.0, 1.0}, q);
  const double p_join = -std::expm1(-q);
  const std::size_t n = 100000;
  std::size_t joined = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (mult::sample_direct(wv, rng::derive(5, rng::kSampling, i))
            .weights.size() == 1)
      ++joined;
  const double freq = static_cast<double>(joined) / static_cast<double>(n);
  const double se = std::sqrt(p_join * (1.0 - p_join) / static_cast<double>(n));
  CHECK(std::abs(freq - p_join) <= 3.0 * se);
}

TEST_CASE("sigma moments and condition report", "[multiplicative]") {
  // Erdos-Renyi embedding: w_i = n^{-2/3}, q = n^{1/3}
  const std::uint64_t n = 4096;
  const double w = std::pow(static_cast<double>(n), -2.0 / 3.0);
  WeightVector wv(std::vector<double>(n, w),
                  std::cbrt(static_cast<double>(n)));
  CHECK(wv.sigma2 ==
        Catch::Approx(std::pow(static_cast<double>(n), -1.0 / 3.0)));
  const auto rep = mult::check_conditions(wv);
  CHECK(rep.sigma3_over_sigma2_cubed == Catch::Approx(1.0));
  CHECK(rep.q_minus_inv_sigma2 == Catch::Approx(0.0).margin(1e-9));

  // single weight: sigma3 / sigma2^3 = w^{-3}
  WeightVector single({2.0}, 1.0);
  const auto rep1 = mult::check_conditions(single);
  CHECK(rep1.sigma3_over_sigma2_cubed == Catch::Approx(std::pow(2.0, -3.0)));

  CHECK_THROWS_AS(mult::check_conditions(single, 0.9), std::invalid_argument);
  CHECK_THROWS_AS(mult::check_conditions(single, 0.1, 11.0),
                  std::invalid_argument);
}

TEST_CASE("exploration endpoints and accounting", "[multiplicative]") {
  WeightVector lonely({1.5}, 2.0);
  const auto tr = mult::sample_exploration(lonely, 4);
  REQUIRE(tr.partition.weights.size() == 1);
  CHECK(tr.partition.weights[0] == Catch::Approx(1.5));
  CHECK(tr.excursion_lengths[0] == Catch::Approx(1.5));

  WeightVector frozen({1.0}, 0.0);
  CHECK_THROWS_AS(mult::sample_exploration(frozen, 1), std::invalid_argument);

  WeightVector wv({0.3, 1.1, 0.7, 0.5}, 1.3);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto t = mult::sample_exploration(wv, seed);
    CHECK(t.total_jump_mass == Catch::Approx(wv.sigma1));
    // final value of the walk at the end of the last excursion
    CHECK(t.final_value ==
          Catch::Approx(wv.sigma1 - t.end_time).margin(1e-9));
    double mass = 0.0;
    for (std::size_t i = 0; i < t.partition.weights.size(); ++i) {
      // excursion length equals component weight
      CHECK(t.excursion_lengths[i] ==
            Catch::Approx(t.partition.weights[i]).margin(1e-9));
      mass += t.partition.weights[i];
    }
    CHECK(mass == Catch::Approx(wv.sigma1));
    // local times weakly increase in discovery order = decrease never
    std::vector<double> lt = t.local_times;
    std::sort(lt.begin(), lt.end());
    // (sorted ascending equals the arrival order of excursions)
    for (std::size_t i = 0; i < lt.size(); ++i) CHECK(lt[i] >= 0.0);
  }
}

TEST_CASE("exploration vs direct partition law at n=3", "[multiplicative]") {
  const double q = 1.0;
  WeightVector wv({1.0, 1.0, 1.0}, q);
  const std::size_t n = 100000;
  std::vector<std::uint64_t> direct(5, 0), explo(5, 0);
  for (std::size_t i = 0; i < n; ++i) {
    ++direct[partition_category(
        mult::sample_direct(wv, rng::derive(121, rng::kSampling, i)))];
    ++explo[partition_category(
        mult::sample_exploration(wv, rng::derive(122, rng::kSampling, i))
            .partition)];
  }
  const auto probs = exact_three_probs(q);
  CHECK(stats::chi2_gof_pvalue(direct, probs) > 0.01);
  CHECK(stats::chi2_gof_pvalue(explo, probs) > 0.01);
  CHECK(stats::chi2_homogeneity_pvalue(direct, explo) > 0.01);
}

TEST_CASE("local time law (light)", "[multiplicative]") {
  const double q = 1.0;
  WeightVector wv({1.0, 1.0, 1.0}, q);
  std::vector<double> l1_singletons, l1_merged;
  for (std::size_t i = 0; i < 60000; ++i) {
    const auto tr =
        mult::sample_exploration(wv, rng::derive(99, rng::kSampling, i));
    if (tr.partition.weights.size() == 3)
      l1_singletons.push_back(tr.local_times[0]);
    else if (tr.partition.weights.size() == 1)
      l1_merged.push_back(tr.local_times[0]);
  }
  // conditionally on the partition, L_1 ~ Exp(q * w(C_1))
  REQUIRE(l1_singletons.size() > 500);
  REQUIRE(l1_merged.size() > 500);
  const auto exp_cdf = [](double rate) {
    return [rate](double x) { return -std::expm1(-rate * x); };
  };
  CHECK(stats::ks_one_sample_pvalue(l1_singletons, exp_cdf(q * 1.0)) > 0.01);
  CHECK(stats::ks_one_sample_pvalue(l1_merged, exp_cdf(q * 3.0)) > 0.01);
}

TEST_CASE("susceptibility_mult closed forms", "[multiplicative]") {
  WeightVector frozen({1.0, 2.0}, 0.0);
  CHECK(mult::susceptibility_mult(frozen, 10, 1).mean == Catch::Approx(5.0));

  const double q = 0.9;
  WeightVector wv({1.0, 1.0}, q);
  const double expect = 4.0 * -std::expm1(-q) + 2.0 * std::exp(-q);
  const auto est = mult::susceptibility_mult(wv, 60000, 5);
  CHECK(std::abs(est.mean - expect) <= 3.0 * est.stderr_);
}

TEST_CASE("susceptibility_mult nondecreasing in q", "[multiplicative]") {
  std::vector<double> w{0.4, 0.7, 1.0, 0.2, 0.5, 0.9, 0.3, 0.6};
  const auto a = mult::susceptibility_mult(WeightVector(w, 0.3), 20000, 8);
  const auto b = mult::susceptibility_mult(WeightVector(w, 0.8), 20000, 9);
  const auto c = mult::susceptibility_mult(WeightVector(w, 1.6), 20000, 10);
  CHECK(b.mean - a.mean > 3.0 * std::hypot(a.stderr_, b.stderr_));
  CHECK(c.mean - b.mean > 3.0 * std::hypot(b.stderr_, c.stderr_));
}

TEST_CASE("bucketed sampler agrees with the quadratic oracle",
          "[multiplicative]") {
  // heterogeneous weights, both code paths on the same ensemble
  std::vector<double> w;
  for (int i = 0; i < 60; ++i)
    w.push_back(0.02 + 0.3 * ((i * 37) % 17) / 17.0);
  const double q = 1.2;
  std::vector<double> quad, buck;
  for (std::size_t i = 0; i < 8000; ++i) {
    quad.push_back(
        mult::sample_direct(WeightVector(w, q),
                            rng::derive(61, rng::kSampling, i))
            .sum_sq_weights());
    buck.push_back(mult::sample_direct(WeightVector(w, q),
                                       rng::derive(62, rng::kSampling, i),
                                       /*bucketed_threshold=*/1)
                       .sum_sq_weights());
  }
  const auto eq = stats::mean_and_se(quad);
  const auto eb = stats::mean_and_se(buck);
  CHECK(std::abs(eq.mean - eb.mean) <=
        3.0 * std::hypot(eq.stderr_, eb.stderr_));
  CHECK(stats::ks_permutation_test(quad, buck, 400, 77).p_value > 0.01);
}

TEST_CASE("er embedding susceptibility matches the kappa oracle",
          "[multiplicative]") {
  // w_i = n^{-2/3}, q = n^{1/3} + lambda: E sum w(C)^2 = n^{-4/3} E sum |C|^2,
  // which the kappa oracle estimates directly from G(n, p)
  const std::uint64_t n = 100000;
  const double w = std::pow(static_cast<double>(n), -2.0 / 3.0);
  WeightVector wv(std::vector<double>(n, w),
                  std::cbrt(static_cast<double>(n)));
  const auto mult_est = mult::susceptibility_mult(wv, 60, 13);
  const auto er_est = oracle::kappa_er(0.0, n, 120, 14);
  CHECK(std::abs(mult_est.mean - er_est.value) <=
        3.0 * std::hypot(mult_est.stderr_, er_est.stderr_));
}
