#pragma once

// Statistics helpers used by the experiment drivers and as independent test
// oracles: exact binomial tails, Wilson score intervals, chi-square and
// NIST-style randomness smoke tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "tamperlock/core.hpp"

namespace tamperlock {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Wilson score interval for a binomial proportion (default z: two-sided 95%).
inline Interval wilson_interval(std::uint64_t successes, std::uint64_t trials,
                                double z = 1.959963984540054) {
  require(trials >= 1, "wilson_interval: trials must be >= 1");
  require(successes <= trials, "wilson_interval: successes > trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  // At the extremes the exact endpoints are 0 and 1; the general formula only
  // misses them by cancellation noise, so pin them instead of clamping.
  const double lo = successes == 0 ? 0.0 : std::max(0.0, center - half);
  const double hi = successes == trials ? 1.0 : std::min(1.0, center + half);
  return {lo, hi};
}

inline double log_binomial_coeff(std::uint64_t n, std::uint64_t k) {
  require(k <= n, "log_binomial_coeff: k > n");
  return std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

inline double binomial_pmf(std::uint64_t n, double p, std::uint64_t k) {
  require(p >= 0.0 && p <= 1.0, "binomial_pmf: p outside [0,1]");
  if (p == 0.0) return k == 0 ? 1.0 : 0.0;
  if (p == 1.0) return k == n ? 1.0 : 0.0;
  const double lg = log_binomial_coeff(n, k) +
                    static_cast<double>(k) * std::log(p) +
                    static_cast<double>(n - k) * std::log1p(-p);
  return std::exp(lg);
}

/// P[Bin(n, p) >= k], summed from the smaller tail for stability.
inline double binomial_tail_ge(std::uint64_t n, double p, std::uint64_t k) {
  if (k == 0) return 1.0;
  if (k > n) return 0.0;
  double upper = 0.0, lower = 0.0;
  for (std::uint64_t i = k; i <= n; ++i) upper += binomial_pmf(n, p, i);
  if (upper < 0.5) return std::min(1.0, upper);
  for (std::uint64_t i = 0; i < k; ++i) lower += binomial_pmf(n, p, i);
  return std::clamp(1.0 - lower, 0.0, 1.0);
}

/// P[Bin(n, p) <= k].
inline double binomial_tail_le(std::uint64_t n, double p, std::uint64_t k) {
  if (k >= n) return 1.0;
  return std::clamp(1.0 - binomial_tail_ge(n, p, k + 1), 0.0, 1.0);
}

/// Upper-tail p-value of a chi-square statistic with df degrees of freedom.
inline double chisq_pvalue(double stat, double df) {
  require(df > 0.0, "chisq_pvalue: df must be > 0");
  if (stat <= 0.0) return 1.0;
  return boost::math::gamma_q(df / 2.0, stat / 2.0);
}

/// Standard normal two-sided p-value for |Z| >= z.
inline double normal_two_sided_pvalue(double z) {
  return std::erfc(std::fabs(z) / std::sqrt(2.0));
}

/// Total variation distance between empirical counts and the uniform law.
inline double tv_from_uniform(const std::vector<std::uint64_t>& counts) {
  require(!counts.empty(), "tv_from_uniform: no cells");
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  require(total > 0, "tv_from_uniform: empty sample");
  const double u = 1.0 / static_cast<double>(counts.size());
  double tv = 0.0;
  for (auto c : counts)
    tv += std::fabs(static_cast<double>(c) / static_cast<double>(total) - u);
  return tv / 2.0;
}

/// Chi-square goodness-of-fit p-value against the uniform law over the cells.
inline double chisq_pvalue_uniform(const std::vector<std::uint64_t>& counts) {
  require(counts.size() >= 2, "chisq_pvalue_uniform: need at least 2 cells");
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  require(total > 0, "chisq_pvalue_uniform: empty sample");
  const double expected = static_cast<double>(total) / static_cast<double>(counts.size());
  double stat = 0.0;
  for (auto c : counts) {
    const double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
  }
  return chisq_pvalue(stat, static_cast<double>(counts.size() - 1));
}

/// Chi-square homogeneity test for two samples over the same cells.
struct ChiSqResult {
  double stat = 0.0;
  double df = 0.0;
  double pvalue = 1.0;
};

inline ChiSqResult chisq_homogeneity(const std::vector<std::uint64_t>& a,
                                     const std::vector<std::uint64_t>& b) {
  require(a.size() == b.size() && !a.empty(), "chisq_homogeneity: cell mismatch");
  double na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    na += static_cast<double>(a[i]);
    nb += static_cast<double>(b[i]);
  }
  require(na > 0 && nb > 0, "chisq_homogeneity: empty sample");
  ChiSqResult r;
  std::size_t used = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double col = static_cast<double>(a[i] + b[i]);
    if (col == 0.0) continue;  // empty cells carry no information
    ++used;
    const double ea = na * col / (na + nb);
    const double eb = nb * col / (na + nb);
    r.stat += (static_cast<double>(a[i]) - ea) * (static_cast<double>(a[i]) - ea) / ea;
    r.stat += (static_cast<double>(b[i]) - eb) * (static_cast<double>(b[i]) - eb) / eb;
  }
  require(used >= 2, "chisq_homogeneity: fewer than two populated cells");
  r.df = static_cast<double>(used - 1);
  r.pvalue = chisq_pvalue(r.stat, r.df);
  return r;
}

/// Monobit frequency test: p-value that the ones/zeros balance is uniform.
inline double monobit_pvalue(const std::vector<std::uint8_t>& bits) {
  require(!bits.empty(), "monobit_pvalue: empty input");
  long long s = 0;
  for (auto b : bits) s += b ? 1 : -1;
  const double s_obs = std::fabs(static_cast<double>(s)) /
                       std::sqrt(static_cast<double>(bits.size()));
  return std::erfc(s_obs / std::sqrt(2.0));
}

/// Wald-Wolfowitz runs test (NIST SP 800-22 form).
inline double runs_pvalue(const std::vector<std::uint8_t>& bits) {
  const std::size_t n = bits.size();
  require(n >= 2, "runs_pvalue: need at least 2 bits");
  double ones = 0;
  for (auto b : bits) ones += b ? 1.0 : 0.0;
  const double pi = ones / static_cast<double>(n);
  if (pi == 0.0 || pi == 1.0) return 0.0;  // degenerate: a single run
  double v = 1.0;
  for (std::size_t i = 1; i < n; ++i) v += (bits[i] != bits[i - 1]) ? 1.0 : 0.0;
  const double nn = static_cast<double>(n);
  const double num = std::fabs(v - 2.0 * nn * pi * (1.0 - pi));
  const double den = 2.0 * std::sqrt(2.0 * nn) * pi * (1.0 - pi);
  return std::erfc(num / den);
}

/// FNV-1a 64-bit hash; used for config fingerprints and matrix identities.
inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace tamperlock
