#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "percolab/graph.hpp"
#include "percolab/percolation.hpp"
#include "percolab/rng.hpp"
#include "percolab/stats.hpp"

// Scaling-window arithmetic: p_c(lambda) root finding against the
// susceptibility target kappa * V^{1/3}, the subcritical anchor p_s, the
// cutoff M_s, q_lambda and p'_c(lambda).

namespace percolab::calib {

inline double default_alpha(int m) {
  return std::log(static_cast<double>(m)) / static_cast<double>(m);
}

struct WindowParams {
  int m = 0;
  std::uint64_t V = 0;
  double lambda = 0.0;
  double alpha_m = 0.0;
  double p_c_hat = 0.0;
  double p_c_hat_ci_lo = 0.0;
  double p_c_hat_ci_hi = 0.0;
  double p_s = 0.0;
  std::uint64_t M_s = 1;
  double chi_ps_hat = 0.0;
  double chi_ps_hat_se = 0.0;
  double q_lambda = 0.0;
  double p_c_prime = 0.0;
  double kappa_hat = 0.0;
  double kappa_hat_se = 0.0;
};

struct CalibrationResult {
  double p_c_hat = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  double chi_at_pc = 0.0;
  double chi_se = 0.0;
  std::size_t final_budget = 0;
  bool ambiguous = false;  // chi CI still straddled the target at full budget
};

namespace detail {

// chi estimator with a fixed common-random-numbers seed schedule: the same
// derived seeds are consulted at every probe level, so chi_hat(p) is
// nondecreasing in p pointwise and bisection is noise-free in the
// comparisons; only the seed set itself carries sampling error.
class CrnSusceptibility {
 public:
  CrnSusceptibility(const TransitiveGraph& g, std::uint64_t seed)
      : g_(&g), seed_(seed) {}

  stats::Estimate estimate(double p, std::size_t budget) const {
    std::vector<double> xs(budget);
    for (std::size_t i = 0; i < budget; ++i) {
      PercolationSample s(*g_, rng::derive(seed_, rng::kSampling, i));
      xs[i] = static_cast<double>(s.cluster_size(p, 0));
    }
    return stats::mean_and_se(xs);
  }

  // Sequential probing against a target: batches are drawn in the fixed
  // seed order until the running CI decides the comparison. A probe that
  // straddles the target keeps doubling its consumption up to max_budget
  // (the ambiguity escalation); `ambiguous` reports a straddle that
  // survived the full budget.
  stats::Estimate probe(double p, std::size_t base_budget,
                        std::size_t max_budget, double target,
                        bool* ambiguous) const {
    double sum = 0.0, sum_sq = 0.0;
    std::size_t n = 0;
    std::size_t batch = 256;  // grows; far-off probes exit after one batch
    stats::Estimate e;
    while (n < max_budget) {
      const std::size_t stop = std::min(max_budget, n + batch);
      batch = std::min(2 * batch, std::max<std::size_t>(512, base_budget / 4));
      for (; n < stop; ++n) {
        PercolationSample s(*g_, rng::derive(seed_, rng::kSampling, n));
        const double x = static_cast<double>(s.cluster_size(p, 0));
        sum += x;
        sum_sq += x * x;
      }
      const double nd = static_cast<double>(n);
      e.mean = sum / nd;
      e.stderr_ = n > 1 ? std::sqrt(std::max(0.0, sum_sq / nd - e.mean * e.mean) /
                                    (nd - 1.0))
                        : 0.0;
      e.n = n;
      const double gap = std::abs(e.mean - target);
      if (n >= base_budget && gap > 3.0 * e.stderr_) break;
      if (n < base_budget && gap > 8.0 * e.stderr_ && e.stderr_ > 0.0) break;
    }
    if (ambiguous) *ambiguous = std::abs(e.mean - target) <= 3.0 * e.stderr_;
    return e;
  }

 private:
  const TransitiveGraph* g_;
  std::uint64_t seed_;
};

}  // namespace detail

// Monotone bisection of chi_hat(p) = target over [0, 2/(m-1)]. Stops when
// the bracket is narrower than 1/(10 m V^{1/3}). A probe whose CI straddles
// the target doubles the budget (up to 3 times); if the final budget still
// straddles, the result is flagged ambiguous.
inline CalibrationResult calibrate_pc(const TransitiveGraph& g, double lambda,
                                      double kappa_hat, std::size_t mc_budget,
                                      std::uint64_t seed) {
  (void)lambda;  // enters only through kappa_hat = kappa(lambda)
  if (!(kappa_hat > 0.0)) throw std::invalid_argument("kappa_hat > 0 required");
  if (mc_budget < 1000) throw std::invalid_argument("mc_budget >= 1000 required");
  const double V = static_cast<double>(g.vertex_count());
  const double target = kappa_hat * std::cbrt(V);
  if (target > V)
    throw std::invalid_argument("target susceptibility exceeds V (supercritical)");
  const int m = g.degree();
  if (m < 2) throw std::invalid_argument("degree >= 2 required");

  detail::CrnSusceptibility chi(g, seed);
  CalibrationResult res;
  res.bracket_lo = 0.0;
  res.bracket_hi = 2.0 / static_cast<double>(m - 1);
  const double stop_width = 1.0 / (10.0 * m * std::cbrt(V));
  std::size_t consumed = mc_budget;

  while (res.bracket_hi - res.bracket_lo >= stop_width) {
    const double mid = 0.5 * (res.bracket_lo + res.bracket_hi);
    bool straddle = false;
    const auto e = chi.probe(mid, mc_budget, 8 * mc_budget, target, &straddle);
    consumed = std::max(consumed, e.n);
    if (straddle) res.ambiguous = true;
    if (e.mean < target)
      res.bracket_lo = mid;
    else
      res.bracket_hi = mid;
  }
  res.p_c_hat = 0.5 * (res.bracket_lo + res.bracket_hi);
  const auto final_est = chi.estimate(res.p_c_hat, mc_budget);
  res.chi_at_pc = final_est.mean;
  res.chi_se = final_est.stderr_;
  res.final_budget = consumed;
  return res;
}

// Populate the full window record from a calibrated p_c_hat. All formula
// fields are exact arithmetic; chi(p_s) is measured by Monte Carlo.
inline WindowParams derive_window(const TransitiveGraph& g, double lambda,
                                  double p_c_hat, std::size_t mc_budget,
                                  std::uint64_t seed,
                                  double kappa_hat = 0.0,
                                  double kappa_hat_se = 0.0,
                                  double alpha_override = 0.0) {
  if (!(p_c_hat > 0.0 && p_c_hat < 1.0))
    throw std::invalid_argument("p_c_hat in (0,1) required");
  WindowParams w;
  w.m = g.degree();
  w.V = g.vertex_count();
  w.lambda = lambda;
  w.alpha_m = alpha_override > 0.0 ? alpha_override : default_alpha(w.m);
  w.p_c_hat = p_c_hat;
  const double V = static_cast<double>(w.V);
  const double eps = std::pow(V, -1.0 / 3.0) * std::pow(w.alpha_m, -1.0 / 3.0);
  w.p_s = p_c_hat * (1.0 - eps);
  if (!(w.p_s > 0.0))
    throw std::invalid_argument(
        "p_s <= 0: m too small for the window formula (V^{-1/3} alpha_m^{-1/3} >= 1)");
  w.M_s = std::max<std::uint64_t>(
      1, static_cast<std::uint64_t>(
             std::floor(std::pow(V, 2.0 / 3.0) * std::pow(w.alpha_m, 4.0))));
  const auto chi = susceptibility(g, w.p_s, mc_budget,
                                  rng::derive(seed, rng::kGeneric, 0x777));
  w.chi_ps_hat = chi.mean;
  w.chi_ps_hat_se = chi.stderr_;
  w.q_lambda = std::cbrt(V) / w.chi_ps_hat + lambda;  // o(1) term set to 0
  w.p_c_prime =
      1.0 - (1.0 - w.p_s) *
                std::exp(-w.q_lambda / (static_cast<double>(w.m) * std::cbrt(V)));
  if (!(w.p_s < w.p_c_prime && w.p_c_prime < 1.0))
    throw std::invalid_argument("window collapsed: need 0 < p_s < p_c' < 1");
  w.kappa_hat = kappa_hat;
  w.kappa_hat_se = kappa_hat_se;
  return w;
}

struct WindowWidthResult {
  double ratio = 0.0;       // (p_c(l2) - p_c(l1)) * m * V^{1/3} / (l2 - l1)
  double ratio_se = 0.0;    // from the calibration brackets
  CalibrationResult cal_lo;
  CalibrationResult cal_hi;
};

// Both calibrations share the kappa oracle values passed in by the caller.
inline WindowWidthResult window_width_check(const TransitiveGraph& g,
                                            double lambda1, double kappa1,
                                            double lambda2, double kappa2,
                                            std::size_t mc_budget,
                                            std::uint64_t seed) {
  if (!(lambda2 > lambda1))
    throw std::invalid_argument("lambda2 > lambda1 required");
  WindowWidthResult out;
  out.cal_lo = calibrate_pc(g, lambda1, kappa1, mc_budget,
                            rng::derive(seed, rng::kGeneric, 1));
  out.cal_hi = calibrate_pc(g, lambda2, kappa2, mc_budget,
                            rng::derive(seed, rng::kGeneric, 2));
  const double V = static_cast<double>(g.vertex_count());
  const double scale = g.degree() * std::cbrt(V) / (lambda2 - lambda1);
  out.ratio = (out.cal_hi.p_c_hat - out.cal_lo.p_c_hat) * scale;
  const double half_lo = 0.5 * (out.cal_lo.bracket_hi - out.cal_lo.bracket_lo);
  const double half_hi = 0.5 * (out.cal_hi.bracket_hi - out.cal_hi.bracket_lo);
  out.ratio_se = std::sqrt(half_lo * half_lo + half_hi * half_hi) * scale;
  return out;
}

}  // namespace percolab::calib
