#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "percolab/rng.hpp"

namespace percolab::stats {

struct Estimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t n = 0;
};

inline Estimate mean_and_se(const std::vector<double>& xs) {
  Estimate e;
  e.n = xs.size();
  if (xs.empty()) return e;
  double s = 0.0;
  for (double x : xs) s += x;
  e.mean = s / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - e.mean) * (x - e.mean);
    e.stderr_ = std::sqrt(ss / (static_cast<double>(xs.size()) - 1.0) /
                          static_cast<double>(xs.size()));
  }
  return e;
}

inline double median(std::vector<double> xs) {
  if (xs.empty()) throw std::invalid_argument("median of empty sample");
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

inline double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw std::invalid_argument("quantile of empty sample");
  std::sort(xs.begin(), xs.end());
  const double pos = q * (static_cast<double>(xs.size()) - 1.0);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= xs.size()) return xs.back();
  const double frac = pos - static_cast<double>(lo);
  return xs[lo] * (1.0 - frac) + xs[lo + 1] * frac;
}

// --- Kolmogorov-Smirnov ---

inline double ks_statistic(std::vector<double> xs, std::vector<double> ys) {
  if (xs.empty() || ys.empty())
    throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  const double nx = static_cast<double>(xs.size());
  const double ny = static_cast<double>(ys.size());
  while (i < xs.size() && j < ys.size()) {
    // consume every copy of the current smallest value on both sides
    const double v = std::min(xs[i], ys[j]);
    while (i < xs.size() && xs[i] == v) ++i;
    while (j < ys.size() && ys[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx -
                             static_cast<double>(j) / ny));
  }
  return d;
}

// Asymptotic Kolmogorov distribution survival function.
inline double kolmogorov_sf(double z) {
  if (z <= 0.0) return 1.0;
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * z * z);
    s += (k % 2 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::min(1.0, std::max(0.0, 2.0 * s));
}

// One-sample KS against a cdf, asymptotic p-value with the usual
// finite-n correction.
inline double ks_one_sample_pvalue(std::vector<double> xs,
                                   const std::function<double(double)>& cdf) {
  if (xs.empty()) throw std::invalid_argument("ks: empty sample");
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  const double z = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  return kolmogorov_sf(z);
}

// --- chi-square ---

// Regularized upper incomplete gamma Q(a, x); series + continued fraction.
inline double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q domain");
  if (x == 0.0) return 1.0;
  const double gln = std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return 1.0 - sum * std::exp(-x + a * std::log(x) - gln);
  }
  double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::abs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - gln) * h;
}

inline double chi2_sf(double stat, int dof) {
  return gamma_q(0.5 * static_cast<double>(dof), 0.5 * stat);
}

// Goodness of fit of observed counts against category probabilities.
inline double chi2_gof_pvalue(const std::vector<std::uint64_t>& counts,
                              const std::vector<double>& probs) {
  if (counts.size() != probs.size() || counts.empty())
    throw std::invalid_argument("chi2_gof: size mismatch");
  double n = 0.0;
  for (auto c : counts) n += static_cast<double>(c);
  double stat = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double e = n * probs[i];
    if (e <= 0.0) throw std::invalid_argument("chi2_gof: zero expected count");
    const double diff = static_cast<double>(counts[i]) - e;
    stat += diff * diff / e;
  }
  return chi2_sf(stat, static_cast<int>(counts.size()) - 1);
}

// Two-sample homogeneity test over shared categories.
inline double chi2_homogeneity_pvalue(const std::vector<std::uint64_t>& a,
                                      const std::vector<std::uint64_t>& b) {
  if (a.size() != b.size() || a.empty())
    throw std::invalid_argument("chi2_homogeneity: size mismatch");
  double na = 0.0, nb = 0.0;
  for (auto c : a) na += static_cast<double>(c);
  for (auto c : b) nb += static_cast<double>(c);
  double stat = 0.0;
  int dof = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double tot = static_cast<double>(a[i]) + static_cast<double>(b[i]);
    if (tot == 0.0) continue;
    const double ea = tot * na / (na + nb);
    const double eb = tot * nb / (na + nb);
    const double da = static_cast<double>(a[i]) - ea;
    const double db = static_cast<double>(b[i]) - eb;
    stat += da * da / ea + db * db / eb;
    ++dof;
  }
  if (dof <= 1) return 1.0;
  return chi2_sf(stat, dof - 1);
}

// --- energy distance ---

// Pooled pairwise Euclidean distances; rows are d-dimensional samples.
class PairwiseDistances {
 public:
  PairwiseDistances(const std::vector<std::vector<double>>& a,
                    const std::vector<std::vector<double>>& b) {
    n_ = a.size() + b.size();
    dist_.assign(n_ * n_, 0.0);
    std::vector<const std::vector<double>*> all;
    all.reserve(n_);
    for (const auto& v : a) all.push_back(&v);
    for (const auto& v : b) all.push_back(&v);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i + 1; j < n_; ++j) {
        double s = 0.0;
        const auto& x = *all[i];
        const auto& y = *all[j];
        if (x.size() != y.size())
          throw std::invalid_argument("energy distance: dimension mismatch");
        for (std::size_t t = 0; t < x.size(); ++t)
          s += (x[t] - y[t]) * (x[t] - y[t]);
        dist_[i * n_ + j] = dist_[j * n_ + i] = std::sqrt(s);
      }
  }

  double at(std::size_t i, std::size_t j) const { return dist_[i * n_ + j]; }
  std::size_t size() const { return n_; }

  // Energy statistic for the group assignment in labels (0 = first sample).
  double energy(const std::vector<std::uint8_t>& labels) const {
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    std::size_t nx = 0;
    for (auto l : labels) nx += (l == 0);
    const std::size_t ny = n_ - nx;
    if (nx == 0 || ny == 0) throw std::invalid_argument("energy: empty group");
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i + 1; j < n_; ++j) {
        const double d = dist_[i * n_ + j];
        if (labels[i] == labels[j]) {
          (labels[i] == 0 ? sxx : syy) += d;
        } else {
          sxy += d;
        }
      }
    const double fx = static_cast<double>(nx);
    const double fy = static_cast<double>(ny);
    return 2.0 * sxy / (fx * fy) - 2.0 * sxx / (fx * fx) -
           2.0 * syy / (fy * fy);
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> dist_;
};

struct PermutationTest {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n_perm = 0;
};

inline void shuffle_labels(std::vector<std::uint8_t>& labels,
                           rng::Sequence& seq) {
  for (std::size_t i = labels.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(seq.next_below(i));
    std::swap(labels[i - 1], labels[j]);
  }
}

// Two-sample energy-distance permutation test on vector samples.
inline PermutationTest energy_permutation_test(
    const std::vector<std::vector<double>>& a,
    const std::vector<std::vector<double>>& b, std::size_t n_perm,
    std::uint64_t seed) {
  PairwiseDistances pd(a, b);
  std::vector<std::uint8_t> labels(pd.size(), 1);
  for (std::size_t i = 0; i < a.size(); ++i) labels[i] = 0;
  PermutationTest out;
  out.statistic = pd.energy(labels);
  out.n_perm = n_perm;
  std::size_t ge = 0;
  rng::Sequence seq(seed, rng::kPermutation);
  std::vector<std::uint8_t> perm = labels;
  for (std::size_t t = 0; t < n_perm; ++t) {
    shuffle_labels(perm, seq);
    if (pd.energy(perm) >= out.statistic) ++ge;
  }
  out.p_value = (1.0 + static_cast<double>(ge)) /
                (1.0 + static_cast<double>(n_perm));
  return out;
}

// Two-sample KS permutation test on scalar samples.
inline PermutationTest ks_permutation_test(const std::vector<double>& a,
                                           const std::vector<double>& b,
                                           std::size_t n_perm,
                                           std::uint64_t seed) {
  PermutationTest out;
  out.statistic = ks_statistic(a, b);
  out.n_perm = n_perm;
  std::vector<double> pooled = a;
  pooled.insert(pooled.end(), b.begin(), b.end());
  rng::Sequence seq(seed, rng::kPermutation);
  std::size_t ge = 0;
  std::vector<double> pa(a.size()), pb(b.size());
  std::vector<double> pool = pooled;
  for (std::size_t t = 0; t < n_perm; ++t) {
    for (std::size_t i = pool.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(seq.next_below(i));
      std::swap(pool[i - 1], pool[j]);
    }
    std::copy(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(a.size()), pa.begin());
    std::copy(pool.begin() + static_cast<std::ptrdiff_t>(a.size()), pool.end(), pb.begin());
    if (ks_statistic(pa, pb) >= out.statistic - 1e-15) ++ge;
  }
  out.p_value = (1.0 + static_cast<double>(ge)) /
                (1.0 + static_cast<double>(n_perm));
  return out;
}

}  // namespace percolab::stats
